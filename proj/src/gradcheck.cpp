#include "pld/gradcheck.hpp"

#include <cmath>

namespace pld {

namespace {

// RL forward, VJP missing the forward-model mean's dependence on the kernel.
class BrokenVjpSolver : public DifferentiableSolver {
public:
    explicit BrokenVjpSolver(const SolverConfig& cfg) : inner_(cfg), cfg_(cfg) {}

    Field2D forward(const Field2D& y, const Field2D& kernel, double alpha,
                    UnrollTape& tape) const override {
        return inner_.forward(y, kernel, alpha, tape);
    }

    void backward(const UnrollTape& tape, const Field2D& y, const Field2D& kernel, double alpha,
                  const Field2D& xbar, Field2D& hbar) const override {
        (void)alpha;
        ConvPlan plan(y.height(), y.width(), kernel);
        const FftGrid& grid = plan.grid();
        const int m = kernel.height();
        Field2D xb = xbar;
        for (int t = cfg_.unrollSteps - 1; t >= 0; --t) {
            const Field2D sbar = xb * tape.x[t];
            hbar += kernel_grad_corr(grid, sbar, tape.ratio[t], m);
            xb = xb * tape.corr[t]; // mean-path contribution dropped
        }
    }

private:
    RichardsonLucySolver inner_;
    SolverConfig cfg_;
};

double uniformIn(PoissonSampler& rng, double lo, double hi) {
    return lo + (hi - lo) * rng.uniform();
}

} // namespace

std::unique_ptr<DifferentiableSolver> make_broken_solver(const SolverConfig& cfg) {
    return std::make_unique<BrokenVjpSolver>(cfg);
}

GradCheckReport run_gradient_check(const SolverFactory& factory, const GradCheckOptions& opt) {
    PoissonSampler rng(opt.seed);
    const double alphas[3] = {10.0, 20.0, 40.0};

    GradCheckReport report;
    report.instances = opt.instances;
    for (int inst = 0; inst < opt.instances; ++inst) {
        const int h = 8 + static_cast<int>(rng.uniform() * (opt.maxImage - 7));
        const int w = 8 + static_cast<int>(rng.uniform() * (opt.maxImage - 7));
        const int mMax = std::min({opt.maxKernel, h, w});
        int m = 3 + 2 * static_cast<int>(rng.uniform() * ((mMax - 1) / 2));
        if (m > mMax) m = mMax % 2 == 1 ? mMax : mMax - 1;
        const double alpha = alphas[inst % 3];

        // smooth positive scene
        Field2D x(h, w);
        const double fr = uniformIn(rng, 0.5, 2.0), fc = uniformIn(rng, 0.5, 2.0);
        const double pr = uniformIn(rng, 0.0, 6.28), pc = uniformIn(rng, 0.0, 6.28);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                x(r, c) = 0.5 + 0.35 * std::sin(fr * r * 0.4 + pr) * std::cos(fc * c * 0.4 + pc);

        Field2D raw(m, m);
        for (size_t i = 0; i < raw.size(); ++i) raw[i] = rng.uniform() + 0.05;
        const BlurKernel kernel = project_kernel(raw);

        const uint64_t simSeed = static_cast<uint64_t>(rng.uniform() * 1e9);
        const Field2D y = simulate(x, kernel, PhotonLevel(alpha), simSeed);
        const Field2D g = clip((1.0 / alpha) * y, 0.0, 1.0);

        SolverConfig cfg;
        cfg.unrollSteps = 1 + static_cast<int>(rng.uniform() * opt.maxUnroll);
        if (cfg.unrollSteps > opt.maxUnroll) cfg.unrollSteps = opt.maxUnroll;
        cfg.boundary = (opt.includeSymmetric && inst % 5 == 4) ? Boundary::symmetric
                                                               : Boundary::circular;
        cfg.kind = opt.kind;
        const auto solver = factory(cfg);

        const LossGrad lg =
            loss_and_grad_with(*solver, y, g, kernel.field(), alpha, cfg.boundary);
        const Field2D fd =
            fd_grad_with(*solver, y, g, kernel.field(), alpha, cfg.boundary, opt.fdStep);

        double scale = maxAbs(fd);
        if (scale < 1e-12) scale = 1e-12;
        const double err = maxAbs(lg.gradKernel - fd) / scale;
        if (err > report.maxRelError) {
            report.maxRelError = err;
            report.worstInstance = inst;
        }
    }
    report.pass = report.maxRelError <= opt.tolerance;
    return report;
}

GradCheckReport run_gradient_check(const GradCheckOptions& opt) {
    return run_gradient_check([](const SolverConfig& cfg) { return make_solver(cfg); }, opt);
}

} // namespace pld
