#pragma once

#include <memory>

#include "pld/denoiser.hpp"
#include "pld/fft_conv.hpp"
#include "pld/poisson.hpp"

namespace pld {

enum class Boundary { circular, symmetric };
enum class SolverKind { richardson_lucy, gradient_descent };

struct SolverConfig {
    int unrollSteps = 8;
    double epsilon = 1e-12; // division guard inside the unrolled updates
    Boundary boundary = Boundary::circular;
    SolverKind kind = SolverKind::richardson_lucy;

    // gradient_descent solver only
    double gdStepScale = 0.5; // step = gdStepScale / alpha^2
    double gdPrior = 1e-3;    // quadratic prior weight

    void validate() const {
        if (unrollSteps < 1) throw std::invalid_argument("SolverConfig: unrollSteps must be >= 1");
        if (!(epsilon > 0.0) || epsilon > 1e-3)
            throw std::invalid_argument("SolverConfig: epsilon must be in (0, 1e-3]");
    }

    bool operator==(const SolverConfig&) const = default;
};

// Per-step snapshots of the unrolled computation, enough to replay it forward
// bit-exactly and to traverse it in reverse. Field meanings are owned by the
// solver that recorded the tape.
struct UnrollTape {
    std::vector<Field2D> x;     // iterates x_0 .. x_K
    std::vector<Field2D> mean;  // guarded forward-model means, one per step
    std::vector<Field2D> ratio; // per-step ratio (RL) or residual factor (GD)
    std::vector<Field2D> corr;  // per-step correlation output (RL only)
};

// A differentiable non-blind solver: forward map (y, h, alpha) -> x-hat plus
// the exact vector-Jacobian product onto the kernel. The kernel argument is a
// raw MxM field so the derivative is of the unconstrained loss; simplex
// projection is a separate optimizer step.
class DifferentiableSolver {
public:
    virtual ~DifferentiableSolver() = default;

    // Returns the pre-clip iterate x_K and records the tape.
    virtual Field2D forward(const Field2D& y, const Field2D& kernel, double alpha,
                            UnrollTape& tape) const = 0;

    // Given xbar = dLoss/dx_K, adds (dx_K/dh)^T xbar onto hbar (MxM, same
    // shape as the kernel, pre-initialized by the caller).
    virtual void backward(const UnrollTape& tape, const Field2D& y, const Field2D& kernel,
                          double alpha, const Field2D& xbar, Field2D& hbar) const = 0;
};

// K unrolled Richardson-Lucy steps:
//   x_0    = mean(y)/alpha  (flat),
//   m_t    = alpha*(h (*) x_t) + eps,
//   x_t+1  = x_t . corr(y/m_t, h).
// Flux is conserved at sum(y)/alpha before the final clip.
class RichardsonLucySolver : public DifferentiableSolver {
public:
    explicit RichardsonLucySolver(const SolverConfig& cfg) : cfg_(cfg) { cfg_.validate(); }
    Field2D forward(const Field2D& y, const Field2D& kernel, double alpha,
                    UnrollTape& tape) const override;
    void backward(const UnrollTape& tape, const Field2D& y, const Field2D& kernel, double alpha,
                  const Field2D& xbar, Field2D& hbar) const override;

private:
    SolverConfig cfg_;
};

// K fixed-step gradient descent steps on the Poisson NLL with a small
// quadratic prior; exists to exercise the solver interface with a second
// independent implementation.
class GradientDescentSolver : public DifferentiableSolver {
public:
    explicit GradientDescentSolver(const SolverConfig& cfg) : cfg_(cfg) { cfg_.validate(); }
    Field2D forward(const Field2D& y, const Field2D& kernel, double alpha,
                    UnrollTape& tape) const override;
    void backward(const UnrollTape& tape, const Field2D& y, const Field2D& kernel, double alpha,
                  const Field2D& xbar, Field2D& hbar) const override;

private:
    SolverConfig cfg_;
};

std::unique_ptr<DifferentiableSolver> make_solver(const SolverConfig& cfg);

struct LossGrad {
    double loss;
    Field2D gradKernel; // MxM
    Field2D estimate;   // clipped image estimate, original dims
};

// x-hat = clip(F(y,h), 0, 1). In symmetric mode the observation is
// mirror-padded by (M-1)/2 before the unroll and the result cropped back.
Field2D solve(const Field2D& y, const BlurKernel& h, PhotonLevel alpha, const SolverConfig& cfg);

// ||g - h (*) F(y,h)||^2, summed over pixels.
double loss_value(const Field2D& y, const Field2D& g, const BlurKernel& h, PhotonLevel alpha,
                  const SolverConfig& cfg);

// Loss plus its exact gradient with respect to each kernel entry, by reverse
// traversal of the recorded tape. Both the outer convolution and every
// occurrence of the kernel inside the unroll contribute.
LossGrad loss_and_grad(const Field2D& y, const Field2D& g, const BlurKernel& h, PhotonLevel alpha,
                       const SolverConfig& cfg);

// Central finite differences of loss_value around h, entry by entry, without
// re-projecting the perturbed kernel. Independent gradient oracle.
Field2D fd_grad_oracle(const Field2D& y, const Field2D& g, const BlurKernel& h, PhotonLevel alpha,
                       const SolverConfig& cfg, double step);

// Interface-level variants used by the conformance suite and the outer loop.
Field2D solve_with(const DifferentiableSolver& solver, const Field2D& y, const Field2D& kernel,
                   double alpha, Boundary boundary, int kernelSize);
double loss_value_with(const DifferentiableSolver& solver, const Field2D& y, const Field2D& g,
                       const Field2D& kernel, double alpha, Boundary boundary);
LossGrad loss_and_grad_with(const DifferentiableSolver& solver, const Field2D& y, const Field2D& g,
                            const Field2D& kernel, double alpha, Boundary boundary);
Field2D fd_grad_with(const DifferentiableSolver& solver, const Field2D& y, const Field2D& g,
                     const Field2D& kernel, double alpha, Boundary boundary, double step);

} // namespace pld
