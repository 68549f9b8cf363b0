#include "pld/blind.hpp"

#include <cmath>
#include <limits>

#include "pld/metrics.hpp"

namespace pld {

double shrinkage(double value, double kappa) {
    const double mag = std::fabs(value) - kappa;
    return mag > 0.0 ? (value < 0.0 ? -mag : mag) : 0.0;
}

Field2D shrinkage(const Field2D& h, double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("shrinkage: kappa must be >= 0");
    Field2D out(h.height(), h.width());
    for (size_t i = 0; i < h.size(); ++i) out[i] = shrinkage(h[i], kappa);
    return out;
}

Field2D h_step(const HqsState& state, const Field2D& gradH, double delta) {
    requireSameShape(state.h, gradH, "h_step");
    // The iterate lives on the unit-sum simplex, so the update direction's
    // uniform component is undone by the renormalization anyway; left in, it
    // turns clip-and-renormalize into an ascent flow for small steps. Step
    // along the tangential (mean-centered) direction.
    Field2D dir(state.h.height(), state.h.width());
    for (size_t i = 0; i < dir.size(); ++i)
        dir[i] = gradH[i] + state.mu * (state.h[i] - state.v[i]);
    const double dbar = mean(dir);
    Field2D raw(state.h.height(), state.h.width());
    for (size_t i = 0; i < raw.size(); ++i)
        raw[i] = state.h[i] - delta * (dir[i] - dbar);
    return project_kernel(raw).field();
}

Field2D v_step(const HqsState& state, bool l1Enabled) {
    if (!l1Enabled) return state.h;
    Field2D v = shrinkage(state.h, state.gamma / state.mu);
    if (maxAbs(v) == 0.0) return state.h; // full threshold; transient
    return v;
}

namespace {

struct EvalResult {
    double loss;
    Field2D gradH;
    Field2D estimate;
};

} // namespace

RunReport run_blind(const Field2D& y, std::optional<double> alpha, const BlindConfig& cfg,
                    const Field2D* truthImage) {
    cfg.validate();
    const double a = alpha ? *alpha : estimate_photon_level(y, cfg.photonBeta).alpha;
    const PhotonLevel level(a);

    const Field2D target = cfg.denoiserEnabled ? denoise(y, level, cfg.denoise)
                                               : clip((1.0 / a) * y, 0.0, 1.0);

    const GaussianBlurParams params = estimate_gaussian_params(target, cfg.init);
    const BlurKernel h0 = render_gaussian_kernel(params, cfg.kernelSize);
    return run_blind_from(y, target, a, h0, cfg, truthImage);
}

RunReport run_blind_from(const Field2D& y, const Field2D& target, double a, const BlurKernel& h0,
                         const BlindConfig& cfg, const Field2D* truthImage) {
    cfg.validate();
    const PhotonLevel level(a);

    HqsState state{h0.field(), h0.field(), cfg.mu0, cfg.gamma0, 0};
    const auto solver = make_solver(cfg.solver);

    std::vector<IterationRecord> records;
    records.reserve(cfg.maxIterations + 1);

    double bestLoss = std::numeric_limits<double>::infinity();
    Field2D bestKernel = state.h;

    // The descent step runs on the pixel-mean residual so that mu, gamma and
    // the step size keep one meaning across image sizes; the report carries
    // the summed loss.
    const double invPixels = 1.0 / static_cast<double>(y.size());
    auto evaluate = [&](const Field2D& kernel) {
        LossGrad lg = loss_and_grad_with(*solver, y, target, kernel, a, cfg.solver.boundary);
        return EvalResult{lg.loss, invPixels * lg.gradKernel, std::move(lg.estimate)};
    };
    auto record = [&](int k, double loss, const Field2D& kernel, const Field2D& estimate) {
        std::optional<double> p;
        if (truthImage) p = psnr(estimate, *truthImage);
        records.push_back(IterationRecord{k, loss, kernel, state.mu, state.gamma, p});
        if (loss < bestLoss) {
            bestLoss = loss;
            bestKernel = kernel;
        }
    };

    bool aborted = false;
    std::string message;
    Field2D lastEstimate;

    for (int k = 0; k < cfg.maxIterations; ++k) {
        EvalResult cur = evaluate(state.h);
        record(k, cur.loss, state.h, cur.estimate);

        Field2D next;
        bool stepped = false;
        try {
            double delta = cfg.stepSize;
            if (!cfg.backtracking) {
                next = h_step(state, cur.gradH, delta);
                stepped = true;
            } else {
                for (int attempt = 0; attempt < 6; ++attempt) {
                    Field2D candidate = h_step(state, cur.gradH, delta);
                    const double candLoss =
                        loss_value_with(*solver, y, target, candidate, a, cfg.solver.boundary);
                    if (candLoss <= cur.loss) {
                        next = std::move(candidate);
                        stepped = true;
                        break;
                    }
                    delta *= 0.5;
                }
                if (!stepped) next = state.h; // no acceptable step; hold position
            }
        } catch (const DegenerateKernelError& e) {
            aborted = true;
            message = e.what();
            break;
        }

        state.h = std::move(next);
        state.v = v_step(state, cfg.l1Enabled);
        state.mu *= 1.01;
        state.gamma /= 1.01;
        state.k = k + 1;
    }

    if (aborted) {
        // Carry the best-so-far kernel in the report.
        BlurKernel finalK = project_kernel(bestKernel);
        Field2D finalX = solve(y, finalK, level, cfg.solver);
        return RunReport{std::move(records), std::move(finalK), std::move(finalX), a, true,
                         std::move(message)};
    }

    EvalResult fin = evaluate(state.h);
    record(state.k, fin.loss, state.h, fin.estimate);
    lastEstimate = std::move(fin.estimate);

    BlurKernel finalK = project_kernel(state.h);
    return RunReport{std::move(records), std::move(finalK), std::move(lastEstimate), a, false, ""};
}

} // namespace pld
