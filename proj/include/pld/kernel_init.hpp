#pragma once

#include "pld/kernel.hpp"
#include "pld/poisson.hpp"

namespace pld {

// Tilted anisotropic Gaussian blur, three parameters.
struct GaussianBlurParams {
    double sigmaMajor; // pixels, >= sigmaMinor
    double sigmaMinor; // pixels, > 0
    double theta;      // radians in [0, pi), major-axis direction (x toward +columns)
};

struct KernelInitConfig {
    // sigma(phi) = sqrt(max(c^2/m(phi)^2 - b^2, sigmaMin^2)) where m(phi) is
    // the largest absolute directional derivative. Calibrated so that a sharp
    // step edge (central-difference slope 0.5) clamps to sigmaMin.
    double c = 0.21;
    double b = 0.4;
    double sigmaMin = 0.3;
    double sigmaMax = 10.0; // cap for directions with vanishing gradient
    int directions = 36;    // 5-degree sweep over [0, pi)

    bool operator==(const KernelInitConfig&) const = default;
};

// Fit blur parameters from a denoised image by sweeping directional
// derivatives: the blur major axis is set perpendicular to the direction of
// the strongest gradient response.
GaussianBlurParams estimate_gaussian_params(const Field2D& g, const KernelInitConfig& cfg = {});

// Sample exp(-0.5 u^T Sigma^-1 u) on an MxM grid centered at the kernel
// center, then project to the kernel simplex. M must be odd; a warning is
// printed when M is too small for 3 sigma of support.
BlurKernel render_gaussian_kernel(const GaussianBlurParams& p, int size);

} // namespace pld
