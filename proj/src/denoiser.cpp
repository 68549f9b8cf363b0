#include "pld/denoiser.hpp"

#include <cmath>

namespace pld {

Field2D anscombe(const Field2D& y) {
    Field2D out(y.height(), y.width());
    for (size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0.0) throw std::invalid_argument("anscombe: negative entry");
        out[i] = 2.0 * std::sqrt(y[i] + 0.375);
    }
    return out;
}

Field2D inverse_anscombe(const Field2D& z) {
    Field2D out(z.height(), z.width());
    for (size_t i = 0; i < z.size(); ++i) {
        const double half = z[i] / 2.0;
        out[i] = half * half - 0.375;
    }
    return out;
}

namespace {

// Forward differences with Neumann boundary (zero at the far edge).
void gradient(const Field2D& u, Field2D& gx, Field2D& gy) {
    const int h = u.height(), w = u.width();
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            gx(r, c) = c + 1 < w ? u(r, c + 1) - u(r, c) : 0.0;
            gy(r, c) = r + 1 < h ? u(r + 1, c) - u(r, c) : 0.0;
        }
}

// Negative adjoint of the gradient above; sums to zero over the grid.
Field2D divergence(const Field2D& px, const Field2D& py) {
    const int h = px.height(), w = px.width();
    Field2D out(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double dx;
            if (c == 0) dx = px(r, 0);
            else if (c == w - 1) dx = -px(r, w - 2);
            else dx = px(r, c) - px(r, c - 1);
            double dy;
            if (r == 0) dy = py(0, c);
            else if (r == h - 1) dy = -py(h - 2, c);
            else dy = py(r, c) - py(r - 1, c);
            out(r, c) = dx + dy;
        }
    return out;
}

} // namespace

Field2D tv_denoise(const Field2D& z, double weight, int iters) {
    if (weight < 0.0) throw std::invalid_argument("tv_denoise: negative weight");
    if (weight == 0.0) return z;

    const int h = z.height(), w = z.width();
    const double tau = 0.25;
    Field2D px(h, w, 0.0), py(h, w, 0.0);
    Field2D gx(h, w), gy(h, w);
    for (int it = 0; it < iters; ++it) {
        Field2D d = divergence(px, py);
        for (size_t i = 0; i < d.size(); ++i) d[i] -= z[i] / weight;
        gradient(d, gx, gy);
        for (size_t i = 0; i < px.size(); ++i) {
            const double norm = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
            const double denom = 1.0 + tau * norm;
            px[i] = (px[i] + tau * gx[i]) / denom;
            py[i] = (py[i] + tau * gy[i]) / denom;
        }
    }
    Field2D d = divergence(px, py);
    Field2D u(h, w);
    for (size_t i = 0; i < u.size(); ++i) u[i] = z[i] - weight * d[i];
    return u;
}

Field2D denoise(const Field2D& y, PhotonLevel alpha, const DenoiseConfig& cfg) {
    cfg.validate();
    if (cfg.mode == DenoiseMode::passthrough)
        return clip((1.0 / alpha.alpha) * y, 0.0, 1.0);

    const Field2D smoothed = tv_denoise(anscombe(y), cfg.tvWeight, cfg.tvIterations);
    Field2D out = inverse_anscombe(smoothed);
    double flux = 0.0;
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = std::max(out[i] / alpha.alpha, 0.0);
        flux += out[i];
    }
    // The squaring in the inverse transform biases the flux low. The target
    // must be flux-faithful to the observation or the kernel loss picks up a
    // spurious uniform gradient component, so rescale to sum(y)/alpha.
    const double wantFlux = sum(y) / alpha.alpha;
    if (flux > 0.0 && wantFlux > 0.0) {
        const double s = wantFlux / flux;
        for (size_t i = 0; i < out.size(); ++i) out[i] *= s;
    }
    return clip(out, 0.0, 1.0);
}

} // namespace pld
