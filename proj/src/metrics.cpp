#include "pld/metrics.hpp"

#include <cmath>
#include <limits>

namespace pld {

double psnr(const Field2D& a, const Field2D& b) {
    requireSameShape(a, b, "psnr");
    double mse = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWindow = 11;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> gaussianTaps() {
    std::vector<double> w(kWindow);
    double s = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - (kWindow - 1) / 2;
        w[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        s += w[i];
    }
    for (double& v : w) v /= s;
    return w;
}

// Separable Gaussian filter, valid region: output is (H-10)x(W-10).
Field2D filterValid(const Field2D& f, const std::vector<double>& taps) {
    const int h = f.height(), w = f.width();
    const int outW = w - kWindow + 1;
    Field2D rows(h, outW);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < outW; ++c) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) acc += taps[k] * f(r, c + k);
            rows(r, c) = acc;
        }
    const int outH = h - kWindow + 1;
    Field2D out(outH, outW);
    for (int r = 0; r < outH; ++r)
        for (int c = 0; c < outW; ++c) {
            double acc = 0.0;
            for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows(r + k, c);
            out(r, c) = acc;
        }
    return out;
}

} // namespace

double ssim(const Field2D& a, const Field2D& b) {
    requireSameShape(a, b, "ssim");
    if (a.height() < kWindow || a.width() < kWindow)
        throw std::invalid_argument("ssim: image smaller than the 11x11 window");

    const auto taps = gaussianTaps();
    const Field2D mua = filterValid(a, taps);
    const Field2D mub = filterValid(b, taps);
    const Field2D saa = filterValid(a * a, taps);
    const Field2D sbb = filterValid(b * b, taps);
    const Field2D sab = filterValid(a * b, taps);

    double acc = 0.0;
    for (size_t i = 0; i < mua.size(); ++i) {
        const double va = saa[i] - mua[i] * mua[i];
        const double vb = sbb[i] - mub[i] * mub[i];
        const double cab = sab[i] - mua[i] * mub[i];
        const double num = (2.0 * mua[i] * mub[i] + kC1) * (2.0 * cab + kC2);
        const double den = (mua[i] * mua[i] + mub[i] * mub[i] + kC1) * (va + vb + kC2);
        acc += num / den;
    }
    return acc / static_cast<double>(mua.size());
}

BlurKernel embed_kernel_centered(const BlurKernel& k, int size) {
    if (size < k.size() || size % 2 == 0)
        throw std::invalid_argument("embed_kernel_centered: bad target size");
    if (size == k.size()) return k;
    Field2D f(size, size, 0.0);
    const int off = (size - k.size()) / 2;
    for (int r = 0; r < k.size(); ++r)
        for (int c = 0; c < k.size(); ++c)
            f(off + r, off + c) = k(r, c);
    return BlurKernel(std::move(f));
}

MaeResult kernel_mae(const BlurKernel& hest, const BlurKernel& htrue, bool align) {
    if (hest.size() != htrue.size())
        throw std::invalid_argument("kernel_mae: kernel sizes differ (embed first)");
    const int m = hest.size();
    const double invCount = 1.0 / (static_cast<double>(m) * m);

    auto maeAtShift = [&](int dy, int dx) {
        double acc = 0.0;
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) {
                const double shifted = hest(((r + dy) % m + m) % m, ((c + dx) % m + m) % m);
                acc += std::fabs(shifted - htrue(r, c));
            }
        return acc * invCount;
    };

    if (!align) return MaeResult{maeAtShift(0, 0), 0, 0};

    // Exhaustive search for the shift minimizing the error itself, so the
    // aligned value can never exceed the unaligned one; ties resolve toward
    // the smallest displacement.
    const int half = (m - 1) / 2;
    double best = std::numeric_limits<double>::infinity();
    int bestDy = 0, bestDx = 0;
    for (int dy = -half; dy <= half; ++dy)
        for (int dx = -half; dx <= half; ++dx) {
            const double mae = maeAtShift(dy, dx);
            const bool better =
                mae < best ||
                (mae == best && std::abs(dy) + std::abs(dx) < std::abs(bestDy) + std::abs(bestDx));
            if (better) {
                best = mae;
                bestDy = dy;
                bestDx = dx;
            }
        }
    return MaeResult{best, bestDy, bestDx};
}

} // namespace pld
