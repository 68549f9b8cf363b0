#pragma once

#include "pld/kernel.hpp"

namespace pld {

struct MaeResult {
    double mae;
    int shiftRow;
    int shiftCol;
};

struct MetricReport {
    double psnr;   // dB, +infinity for identical inputs
    double ssim;   // in [-1, 1]
    MaeResult kernelMae;
};

// 10*log10(1/MSE) for images with peak value 1. Identical inputs give
// +infinity; serializers cap it at 99 dB.
double psnr(const Field2D& a, const Field2D& b);

// Mean local SSIM over an 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2,
// C2 = 0.03^2, valid region only. Requires dims >= 11.
double ssim(const Field2D& a, const Field2D& b);

// ||hest - htrue||_1 / M^2. With align set, hest is first circularly shifted
// to the integer offset minimizing the error (exhaustive search over all
// shifts); ties resolve toward the smallest shift. Blind estimates carry an
// inherent translation ambiguity, so align-on is the benchmark default.
MaeResult kernel_mae(const BlurKernel& hest, const BlurKernel& htrue, bool align);

// Center-embed a kernel into a larger odd-sized grid (metric preprocessing
// for size-mismatched comparisons).
BlurKernel embed_kernel_centered(const BlurKernel& k, int size);

} // namespace pld
