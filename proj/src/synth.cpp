#include "pld/synth.hpp"

#include <cmath>

#include "pld/io.hpp"
#include "pld/kernel_init.hpp"
#include "pld/poisson.hpp"

namespace pld {

Field2D make_scene(int height, int width, uint64_t seed) {
    PoissonSampler rng(seed);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };

    Field2D img(height, width);
    const double bgA = uni(0.15, 0.35), bgB = uni(0.35, 0.55);
    const double fx = uni(0.5, 2.0) * M_PI / width, fy = uni(0.5, 2.0) * M_PI / height;
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            img(r, c) = bgA + (bgB - bgA) * 0.5 * (1.0 + std::sin(fy * r) * std::cos(fx * c));

    // soft-edged ellipses at assorted intensities
    const int nShapes = 6 + static_cast<int>(rng.uniform() * 5);
    for (int s = 0; s < nShapes; ++s) {
        const double cx = uni(0.1, 0.9) * width, cy = uni(0.1, 0.9) * height;
        const double ax = uni(0.04, 0.22) * width, ay = uni(0.04, 0.22) * height;
        const double ang = uni(0.0, M_PI);
        const double level = uni(0.05, 0.95);
        const double feather = uni(0.6, 2.0);
        const double ca = std::cos(ang), sa = std::sin(ang);
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c) {
                const double dx = c - cx, dy = r - cy;
                const double u = (dx * ca + dy * sa) / ax;
                const double v = (-dx * sa + dy * ca) / ay;
                const double d = std::sqrt(u * u + v * v) - 1.0;
                const double t = 1.0 / (1.0 + std::exp(d * std::min(ax, ay) / feather));
                img(r, c) = img(r, c) * (1.0 - t) + level * t;
            }
    }

    // a couple of bars for straight edges
    for (int s = 0; s < 2; ++s) {
        const bool horizontal = rng.uniform() < 0.5;
        const int pos = static_cast<int>(uni(0.2, 0.8) * (horizontal ? height : width));
        const int thick = 2 + static_cast<int>(rng.uniform() * 5);
        const double level = uni(0.05, 0.95);
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c) {
                const int d = horizontal ? r - pos : c - pos;
                if (d >= 0 && d < thick) img(r, c) = level;
            }
    }

    return clip(img, 0.03, 0.97);
}

BlurKernel make_line_kernel(int size, double length, double angleDeg) {
    if (size % 2 == 0) throw std::invalid_argument("make_line_kernel: size must be odd");
    if (length < 0.0) throw std::invalid_argument("make_line_kernel: negative length");
    const int c = (size - 1) / 2;
    if (length < 1.0) return BlurKernel::delta(size);

    const double theta = angleDeg * M_PI / 180.0;
    const double dx = std::cos(theta), dy = std::sin(theta);
    Field2D raw(size, size, 0.0);
    const int samples = std::max(2, static_cast<int>(std::ceil(length * 8)));
    for (int s = 0; s < samples; ++s) {
        const double t = -0.5 * length + length * (s + 0.5) / samples;
        const double px = c + t * dx, py = c + t * dy;
        const int x0 = static_cast<int>(std::floor(px)), y0 = static_cast<int>(std::floor(py));
        const double wx = px - x0, wy = py - y0;
        // bilinear splat
        for (int oy = 0; oy <= 1; ++oy)
            for (int ox = 0; ox <= 1; ++ox) {
                const int xx = x0 + ox, yy = y0 + oy;
                if (xx < 0 || xx >= size || yy < 0 || yy >= size) continue;
                raw(yy, xx) += (ox ? wx : 1.0 - wx) * (oy ? wy : 1.0 - wy);
            }
    }
    return project_kernel(raw);
}

BlurKernel parse_kernel_spec(const std::string& spec, int size) {
    if (spec == "delta") return BlurKernel::delta(size);
    auto parseTriple = [&](const std::string& body, double out[3], int want) {
        size_t pos = 0;
        for (int i = 0; i < want; ++i) {
            const size_t next = body.find(',', pos);
            const std::string tok =
                next == std::string::npos ? body.substr(pos) : body.substr(pos, next - pos);
            out[i] = std::stod(tok);
            if (next == std::string::npos && i + 1 < want)
                throw std::invalid_argument("kernel spec: expected more parameters");
            pos = next + 1;
        }
    };
    if (spec.rfind("gauss:", 0) == 0) {
        double p[3];
        parseTriple(spec.substr(6), p, 3);
        return render_gaussian_kernel(
            GaussianBlurParams{p[0], p[1], p[2] * M_PI / 180.0}, size);
    }
    if (spec.rfind("line:", 0) == 0) {
        double p[3] = {0, 0, 0};
        parseTriple(spec.substr(5), p, 2);
        return make_line_kernel(size, p[0], p[1]);
    }
    return load_kernel_text(spec);
}

} // namespace pld
