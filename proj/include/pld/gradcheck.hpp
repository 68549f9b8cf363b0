#pragma once

#include <functional>

#include "pld/solver.hpp"

namespace pld {

struct GradCheckOptions {
    int instances = 50;
    int maxImage = 24;  // image sides drawn from [8, maxImage]
    int maxKernel = 7;  // odd kernel sides up to this
    int maxUnroll = 4;  // unroll depths drawn from [1, maxUnroll]
    uint64_t seed = 1234;
    double fdStep = 1e-5;
    double tolerance = 1e-4; // max-norm relative error
    SolverKind kind = SolverKind::richardson_lucy;
    bool includeSymmetric = true; // fold a few symmetric-boundary instances in
};

struct GradCheckReport {
    int instances = 0;
    double maxRelError = 0.0;
    int worstInstance = -1;
    bool pass = false;
};

using SolverFactory = std::function<std::unique_ptr<DifferentiableSolver>(const SolverConfig&)>;

// Compares a solver's reverse-mode kernel gradient against central finite
// differences over randomized instances (photon levels 10/20/40, simulated
// observations, varying image size, kernel size and unroll depth). The
// conformance contract for any DifferentiableSolver implementation.
GradCheckReport run_gradient_check(const SolverFactory& factory, const GradCheckOptions& opt);

// Convenience: checks the stock solver selected by opt.kind.
GradCheckReport run_gradient_check(const GradCheckOptions& opt);

// Richardson-Lucy forward with a deliberately wrong VJP (one term dropped).
// Must fail the suite; exists so the suite itself stays testable.
std::unique_ptr<DifferentiableSolver> make_broken_solver(const SolverConfig& cfg);

} // namespace pld
