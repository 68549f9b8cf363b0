#include "pld/kernel_init.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace pld {

namespace {

inline int clampIndex(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

} // namespace

GaussianBlurParams estimate_gaussian_params(const Field2D& g, const KernelInitConfig& cfg) {
    const int h = g.height(), w = g.width();
    if (h < 3 || w < 3)
        throw std::invalid_argument("estimate_gaussian_params: image too small");

    // Central differences with edge replication; x runs along columns.
    Field2D gx(h, w), gy(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            gx(r, c) = 0.5 * (g(r, clampIndex(c + 1, w)) - g(r, clampIndex(c - 1, w)));
            gy(r, c) = 0.5 * (g(clampIndex(r + 1, h), c) - g(clampIndex(r - 1, h), c));
        }

    const int nDir = cfg.directions;
    std::vector<double> m(nDir, 0.0);
    for (int d = 0; d < nDir; ++d) {
        const double phi = std::numbers::pi * d / nDir;
        const double cs = std::cos(phi), sn = std::sin(phi);
        double best = 0.0;
        for (size_t i = 0; i < gx.size(); ++i)
            best = std::max(best, std::fabs(gx[i] * cs + gy[i] * sn));
        m[d] = best;
    }

    int dMax = 0;
    for (int d = 1; d < nDir; ++d)
        if (m[d] > m[dMax]) dMax = d;
    if (m[dMax] <= 0.0)
        throw DegenerateInputError("estimate_gaussian_params: constant image");

    auto sigmaAt = [&](int d) {
        const double md = m[d];
        if (md <= 0.0) return cfg.sigmaMax;
        const double s2 = cfg.c * cfg.c / (md * md) - cfg.b * cfg.b;
        const double s = std::sqrt(std::max(s2, cfg.sigmaMin * cfg.sigmaMin));
        return std::min(s, cfg.sigmaMax);
    };

    // Strongest response = sharpest direction; the blur major axis is
    // perpendicular to it.
    const int dPerp = (dMax + nDir / 2) % nDir;
    double theta = std::numbers::pi * dPerp / nDir;
    double sigmaMajor = sigmaAt(dPerp);
    double sigmaMinor = sigmaAt(dMax);
    if (sigmaMinor > sigmaMajor) {
        std::swap(sigmaMajor, sigmaMinor);
        theta = std::fmod(theta + std::numbers::pi / 2, std::numbers::pi);
    }
    return GaussianBlurParams{sigmaMajor, sigmaMinor, theta};
}

BlurKernel render_gaussian_kernel(const GaussianBlurParams& p, int size) {
    if (size % 2 == 0)
        throw std::invalid_argument("render_gaussian_kernel: kernel size must be odd");
    if (!(p.sigmaMajor >= p.sigmaMinor) || !(p.sigmaMinor > 0.0))
        throw std::invalid_argument("render_gaussian_kernel: need sigmaMajor >= sigmaMinor > 0");
    const int recommended = 2 * static_cast<int>(std::ceil(3.0 * p.sigmaMajor)) + 1;
    if (size < recommended)
        std::fprintf(stderr,
                     "render_gaussian_kernel: size %d below recommended %d for sigma %.3f\n",
                     size, recommended, p.sigmaMajor);

    const int c = (size - 1) / 2;
    const double ca = std::cos(p.theta), sa = std::sin(p.theta);
    Field2D raw(size, size);
    for (int r = 0; r < size; ++r)
        for (int col = 0; col < size; ++col) {
            const double dx = col - c, dy = r - c;
            const double major = dx * ca + dy * sa;
            const double minor = -dx * sa + dy * ca;
            raw(r, col) = std::exp(-0.5 * (major * major / (p.sigmaMajor * p.sigmaMajor) +
                                           minor * minor / (p.sigmaMinor * p.sigmaMinor)));
        }
    return project_kernel(raw);
}

} // namespace pld
