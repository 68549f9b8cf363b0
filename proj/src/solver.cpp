#include "pld/solver.hpp"

#include <cmath>

namespace pld {

namespace {

Field2D flatInit(const Field2D& y, double alpha) {
    return Field2D(y.height(), y.width(), mean(y) / alpha);
}

} // namespace

// ---- Richardson-Lucy ------------------------------------------------------

Field2D RichardsonLucySolver::forward(const Field2D& y, const Field2D& kernel, double alpha,
                                      UnrollTape& tape) const {
    const int steps = cfg_.unrollSteps;
    const double eps = cfg_.epsilon;
    ConvPlan plan(y.height(), y.width(), kernel);

    tape = UnrollTape{};
    tape.x.reserve(steps + 1);
    tape.mean.reserve(steps);
    tape.ratio.reserve(steps);
    tape.corr.reserve(steps);

    tape.x.push_back(flatInit(y, alpha));
    for (int t = 0; t < steps; ++t) {
        const Field2D& xt = tape.x.back();
        Field2D m = plan.convolve(xt);
        for (size_t i = 0; i < m.size(); ++i) m[i] = alpha * m[i] + eps;
        Field2D r(y.height(), y.width());
        for (size_t i = 0; i < r.size(); ++i) r[i] = y[i] / m[i];
        Field2D s = plan.correlate(r);
        Field2D xn = xt * s;
        tape.mean.push_back(std::move(m));
        tape.ratio.push_back(std::move(r));
        tape.corr.push_back(std::move(s));
        tape.x.push_back(std::move(xn));
    }
    return tape.x.back();
}

void RichardsonLucySolver::backward(const UnrollTape& tape, const Field2D& y,
                                    const Field2D& kernel, double alpha, const Field2D& xbar,
                                    Field2D& hbar) const {
    // Reverse sweep of  m_t = alpha*(h (*) x_t) + eps,  r_t = y/m_t,
    // s_t = corr(r_t, h),  x_{t+1} = x_t . s_t.
    //
    //   sbar = xbar . x_t                  (product rule)
    //   hbar += sum_i sbar(i) r_t(i+j)     (s = corr(r, h) wrt h)
    //   rbar = h (*) sbar                  (corr adjoint wrt r)
    //   mbar = -rbar . r_t / m_t           (r = y/m)
    //   hbar += alpha * sum_i mbar(i) x_t(i-j)
    //   xbar = xbar . s_t + alpha * corr(mbar, h)
    const int steps = cfg_.unrollSteps;
    ConvPlan plan(y.height(), y.width(), kernel);
    const FftGrid& grid = plan.grid();
    const int m = kernel.height();

    Field2D xb = xbar;
    for (int t = steps - 1; t >= 0; --t) {
        const Field2D& xt = tape.x[t];
        const Field2D sbar = xb * xt;
        Field2D xbNext = xb * tape.corr[t];

        hbar += kernel_grad_corr(grid, sbar, tape.ratio[t], m);

        const Field2D rbar = plan.convolve(sbar);
        Field2D mbar(y.height(), y.width());
        for (size_t i = 0; i < mbar.size(); ++i)
            mbar[i] = -rbar[i] * tape.ratio[t][i] / tape.mean[t][i];

        hbar += alpha * kernel_grad_conv(grid, mbar, xt, m);
        xbNext += alpha * plan.correlate(mbar);
        xb = std::move(xbNext);
    }
    // x_0 is a constant; xb is discarded.
}

// ---- gradient descent on the NLL ------------------------------------------

Field2D GradientDescentSolver::forward(const Field2D& y, const Field2D& kernel, double alpha,
                                       UnrollTape& tape) const {
    const int steps = cfg_.unrollSteps;
    const double eps = cfg_.epsilon;
    const double eta = cfg_.gdStepScale / (alpha * alpha);
    const double prior = cfg_.gdPrior;
    ConvPlan plan(y.height(), y.width(), kernel);

    tape = UnrollTape{};
    tape.x.push_back(flatInit(y, alpha));
    for (int t = 0; t < steps; ++t) {
        const Field2D& xt = tape.x.back();
        Field2D m = plan.convolve(xt);
        for (size_t i = 0; i < m.size(); ++i) m[i] = alpha * m[i] + eps;
        Field2D u(y.height(), y.width());
        for (size_t i = 0; i < u.size(); ++i) u[i] = 1.0 - y[i] / m[i];
        const Field2D w = plan.correlate(u);
        Field2D xn(y.height(), y.width());
        for (size_t i = 0; i < xn.size(); ++i)
            xn[i] = xt[i] - eta * (alpha * w[i] + prior * xt[i]);
        tape.mean.push_back(std::move(m));
        tape.ratio.push_back(std::move(u));
        tape.x.push_back(std::move(xn));
    }
    return tape.x.back();
}

void GradientDescentSolver::backward(const UnrollTape& tape, const Field2D& y,
                                     const Field2D& kernel, double alpha, const Field2D& xbar,
                                     Field2D& hbar) const {
    const int steps = cfg_.unrollSteps;
    const double eta = cfg_.gdStepScale / (alpha * alpha);
    const double prior = cfg_.gdPrior;
    ConvPlan plan(y.height(), y.width(), kernel);
    const FftGrid& grid = plan.grid();
    const int m = kernel.height();

    Field2D xb = xbar;
    for (int t = steps - 1; t >= 0; --t) {
        const Field2D& xt = tape.x[t];
        const Field2D wbar = -eta * alpha * xb;
        hbar += kernel_grad_corr(grid, wbar, tape.ratio[t], m);

        const Field2D ubar = plan.convolve(wbar);
        Field2D mbar(y.height(), y.width());
        for (size_t i = 0; i < mbar.size(); ++i)
            mbar[i] = ubar[i] * y[i] / (tape.mean[t][i] * tape.mean[t][i]);

        hbar += alpha * kernel_grad_conv(grid, mbar, xt, m);
        Field2D xbNext = (1.0 - eta * prior) * xb;
        xbNext += alpha * plan.correlate(mbar);
        xb = std::move(xbNext);
    }
}

std::unique_ptr<DifferentiableSolver> make_solver(const SolverConfig& cfg) {
    switch (cfg.kind) {
    case SolverKind::gradient_descent: return std::make_unique<GradientDescentSolver>(cfg);
    case SolverKind::richardson_lucy:
    default: return std::make_unique<RichardsonLucySolver>(cfg);
    }
}

// ---- loss plumbing ---------------------------------------------------------

namespace {

int padAmount(Boundary boundary, int kernelSize) {
    return boundary == Boundary::symmetric ? (kernelSize - 1) / 2 : 0;
}

// Adjoint of crop_center: place the small field into the centered window of a
// zero field of the padded size.
Field2D embedCenter(const Field2D& small, int outH, int outW) {
    Field2D out(outH, outW, 0.0);
    const int r0 = (outH - small.height()) / 2;
    const int c0 = (outW - small.width()) / 2;
    for (int r = 0; r < small.height(); ++r)
        for (int c = 0; c < small.width(); ++c)
            out(r0 + r, c0 + c) = small(r, c);
    return out;
}

struct ForwardPass {
    double loss;
    Field2D xK;       // padded dims
    Field2D residual; // original dims, z - g
    UnrollTape tape;
    Field2D yWork; // padded observation actually fed to the solver
};

ForwardPass runForward(const DifferentiableSolver& solver, const Field2D& y, const Field2D& g,
                       const Field2D& kernel, double alpha, Boundary boundary) {
    requireSameShape(y, g, "loss: target shape");
    const int pad = padAmount(boundary, kernel.height());
    ForwardPass fp{0.0, Field2D(), Field2D(), UnrollTape{}, Field2D()};
    fp.yWork = pad > 0 ? pad_symmetric(y, pad, pad, pad, pad) : y;
    fp.xK = solver.forward(fp.yWork, kernel, alpha, fp.tape);

    ConvPlan plan(fp.yWork.height(), fp.yWork.width(), kernel);
    Field2D z = plan.convolve(fp.xK);
    if (pad > 0) z = crop_center(z, y.height(), y.width());
    fp.residual = z - g;
    double acc = 0.0;
    for (size_t i = 0; i < fp.residual.size(); ++i) acc += fp.residual[i] * fp.residual[i];
    fp.loss = acc;
    return fp;
}

} // namespace

Field2D solve_with(const DifferentiableSolver& solver, const Field2D& y, const Field2D& kernel,
                   double alpha, Boundary boundary, int kernelSize) {
    const int pad = padAmount(boundary, kernelSize);
    const Field2D yWork = pad > 0 ? pad_symmetric(y, pad, pad, pad, pad) : y;
    UnrollTape tape;
    Field2D x = solver.forward(yWork, kernel, alpha, tape);
    x = clip(x, 0.0, 1.0);
    if (pad > 0) x = crop_center(x, y.height(), y.width());
    return x;
}

double loss_value_with(const DifferentiableSolver& solver, const Field2D& y, const Field2D& g,
                       const Field2D& kernel, double alpha, Boundary boundary) {
    return runForward(solver, y, g, kernel, alpha, boundary).loss;
}

LossGrad loss_and_grad_with(const DifferentiableSolver& solver, const Field2D& y, const Field2D& g,
                            const Field2D& kernel, double alpha, Boundary boundary) {
    ForwardPass fp = runForward(solver, y, g, kernel, alpha, boundary);
    const int pad = padAmount(boundary, kernel.height());

    Field2D zbar = 2.0 * fp.residual;
    if (pad > 0) zbar = embedCenter(zbar, fp.yWork.height(), fp.yWork.width());

    ConvPlan plan(fp.yWork.height(), fp.yWork.width(), kernel);
    Field2D hbar = kernel_grad_conv(plan.grid(), zbar, fp.xK, kernel.height());
    const Field2D xbar = plan.correlate(zbar);
    solver.backward(fp.tape, fp.yWork, kernel, alpha, xbar, hbar);

    Field2D est = clip(fp.xK, 0.0, 1.0);
    if (pad > 0) est = crop_center(est, y.height(), y.width());
    return LossGrad{fp.loss, std::move(hbar), std::move(est)};
}

Field2D fd_grad_with(const DifferentiableSolver& solver, const Field2D& y, const Field2D& g,
                     const Field2D& kernel, double alpha, Boundary boundary, double step) {
    if (step < 1e-7 || step > 1e-3)
        throw std::invalid_argument("fd_grad: step must be in [1e-7, 1e-3]");
    Field2D grad(kernel.height(), kernel.width());
    Field2D probe = kernel;
    for (int r = 0; r < kernel.height(); ++r)
        for (int c = 0; c < kernel.width(); ++c) {
            const double saved = probe(r, c);
            probe(r, c) = saved + step;
            const double up = loss_value_with(solver, y, g, probe, alpha, boundary);
            probe(r, c) = saved - step;
            const double down = loss_value_with(solver, y, g, probe, alpha, boundary);
            probe(r, c) = saved;
            grad(r, c) = (up - down) / (2.0 * step);
        }
    return grad;
}

// ---- validated public surface ----------------------------------------------

Field2D solve(const Field2D& y, const BlurKernel& h, PhotonLevel alpha, const SolverConfig& cfg) {
    cfg.validate();
    return solve_with(*make_solver(cfg), y, h.field(), alpha.alpha, cfg.boundary, h.size());
}

double loss_value(const Field2D& y, const Field2D& g, const BlurKernel& h, PhotonLevel alpha,
                  const SolverConfig& cfg) {
    cfg.validate();
    return loss_value_with(*make_solver(cfg), y, g, h.field(), alpha.alpha, cfg.boundary);
}

LossGrad loss_and_grad(const Field2D& y, const Field2D& g, const BlurKernel& h, PhotonLevel alpha,
                       const SolverConfig& cfg) {
    cfg.validate();
    return loss_and_grad_with(*make_solver(cfg), y, g, h.field(), alpha.alpha, cfg.boundary);
}

Field2D fd_grad_oracle(const Field2D& y, const Field2D& g, const BlurKernel& h, PhotonLevel alpha,
                       const SolverConfig& cfg, double step) {
    cfg.validate();
    return fd_grad_with(*make_solver(cfg), y, g, h.field(), alpha.alpha, cfg.boundary, step);
}

} // namespace pld
