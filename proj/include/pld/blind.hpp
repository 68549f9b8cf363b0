#pragma once

#include <optional>

#include "pld/denoiser.hpp"
#include "pld/kernel_init.hpp"
#include "pld/solver.hpp"

namespace pld {

// Iterate of the half-quadratic splitting loop. mu compounds by 1.01 per
// iteration, gamma decays by the same factor.
struct HqsState {
    Field2D h;    // kernel iterate, kept projected
    Field2D v;    // auxiliary split variable
    double mu;    // quadratic penalty weight
    double gamma; // l1 strength
    int k;        // iteration counter
};

struct BlindConfig {
    int maxIterations = 20; // 0 = initialization only
    double stepSize = 0.4;  // descent step on the pixel-mean loss
    int kernelSize = 31;
    bool l1Enabled = true;
    bool denoiserEnabled = true;
    bool backtracking = true; // halve the step (up to 5 times) when the loss increases
    double mu0 = 2.0;
    double gamma0 = 1e-3;
    double photonBeta = 0.33; // photon-level estimation constant
    SolverConfig solver;
    DenoiseConfig denoise;
    KernelInitConfig init;

    void validate() const {
        if (maxIterations < 0) throw std::invalid_argument("BlindConfig: maxIterations < 0");
        if (!(stepSize > 0.0)) throw std::invalid_argument("BlindConfig: stepSize must be > 0");
        if (kernelSize < 3 || kernelSize % 2 == 0)
            throw std::invalid_argument("BlindConfig: kernelSize must be odd and >= 3");
        solver.validate();
        denoise.validate();
    }

    bool operator==(const BlindConfig&) const = default;
};

struct IterationRecord {
    int k;
    double loss;
    Field2D kernel; // snapshot of h^k
    double mu;
    double gamma;
    std::optional<double> psnr; // vs. the monitoring ground truth, when given
};

struct RunReport {
    std::vector<IterationRecord> perIteration; // k = 0 .. I
    BlurKernel finalKernel;
    Field2D finalImage;
    double alphaUsed;
    bool aborted = false;
    std::string message;
};

// Elementwise soft threshold max(|h| - kappa, 0) * sign(h).
Field2D shrinkage(const Field2D& h, double kappa);
double shrinkage(double value, double kappa);

// One gradient step h - delta*(grad + mu*(h - v)) followed by simplex
// projection. Throws DegenerateKernelError when nothing survives the clip.
Field2D h_step(const HqsState& state, const Field2D& gradH, double delta);

// v update: soft threshold at gamma/mu when the l1 prior is enabled, copy of
// h otherwise. An all-zero shrinkage result falls back to h (the threshold
// shrinks every iteration, so the condition is transient).
Field2D v_step(const HqsState& state, bool l1Enabled);

// The full unsupervised loop: denoise, initialize from the anisotropic
// Gaussian fit, then iterate gradient steps on the kernel through the
// differentiable solver with the mu/gamma schedules. Returns the final kernel
// and F(y, h). truthImage, when given, only feeds the per-iteration PSNR
// column of the report.
RunReport run_blind(const Field2D& y, std::optional<double> alpha, const BlindConfig& cfg,
                    const Field2D* truthImage = nullptr);

// Lower-level entry with an explicit loss target and initial kernel; the
// degenerate-kernel abort carries the best-so-far (lowest-loss) kernel.
RunReport run_blind_from(const Field2D& y, const Field2D& target, double alpha,
                         const BlurKernel& h0, const BlindConfig& cfg,
                         const Field2D* truthImage = nullptr);

} // namespace pld
