#pragma once

#include "pld/poisson.hpp"

namespace pld {

enum class DenoiseMode { anscombe_tv, passthrough };

struct DenoiseConfig {
    double tvWeight = 0.9; // Anscombe-domain noise has unit variance
    int tvIterations = 50;
    DenoiseMode mode = DenoiseMode::anscombe_tv;

    void validate() const {
        if (tvWeight < 0.0) throw std::invalid_argument("DenoiseConfig: tvWeight must be >= 0");
        if (mode == DenoiseMode::anscombe_tv && tvIterations < 1)
            throw std::invalid_argument("DenoiseConfig: tvIterations must be >= 1");
    }

    bool operator==(const DenoiseConfig&) const = default;
};

// Variance-stabilizing transform, elementwise 2*sqrt(y + 3/8).
Field2D anscombe(const Field2D& y);
// Algebraic inverse (z/2)^2 - 3/8.
Field2D inverse_anscombe(const Field2D& z);

// Approximate minimizer of 0.5*||u - z||^2 + weight*TV(u) by Chambolle's
// dual projection scheme with a fixed iteration count.
Field2D tv_denoise(const Field2D& z, double weight, int iters);

// Shot-noise removal that keeps blur intact: anscombe -> tv -> inverse
// anscombe -> /alpha -> clip to [0,1]. Serves as the target image for the
// kernel loss.
Field2D denoise(const Field2D& y, PhotonLevel alpha, const DenoiseConfig& cfg);

} // namespace pld
