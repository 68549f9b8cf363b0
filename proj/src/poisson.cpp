#include "pld/poisson.hpp"

#include <cmath>
#include <limits>

namespace pld {

long PoissonSampler::drawSmall(double mean) {
    // Inversion by sequential search on the cdf; one uniform per draw. The
    // iteration cap guards against a uniform landing past the representable
    // tail mass.
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    long k = 0;
    while (u > cdf && k < 1000) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

long PoissonSampler::drawPtrs(double mean) {
    // Hormann's transformed rejection with squeeze, valid for mean >= 10.
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);

    while (true) {
        const double u = uniform() - 0.5;
        double v = uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            -mean + kf * loglam - std::lgamma(kf + 1.0))
            return static_cast<long>(kf);
    }
}

long PoissonSampler::draw(double mean) {
    if (mean < 0.0) throw std::invalid_argument("PoissonSampler: negative mean");
    if (mean == 0.0) return 0;
    return mean < 30.0 ? drawSmall(mean) : drawPtrs(mean);
}

Field2D simulate(const Field2D& x, const BlurKernel& h, PhotonLevel alpha, uint64_t seed) {
    Field2D lam = convolve_circular(x, h);
    PoissonSampler sampler(seed);
    Field2D y(x.height(), x.width());
    for (size_t i = 0; i < lam.size(); ++i) {
        // FFT round-off can leave means a hair below zero.
        const double m = std::max(0.0, alpha.alpha * lam[i]);
        y[i] = static_cast<double>(sampler.draw(m));
    }
    return y;
}

double poisson_nll(const Field2D& y, const Field2D& lam) {
    requireSameShape(y, lam, "poisson_nll");
    double acc = 0.0;
    for (size_t i = 0; i < y.size(); ++i) {
        if (lam[i] < 0.0)
            throw std::invalid_argument("poisson_nll: negative rate");
        acc += lam[i];
        if (y[i] > 0.0) {
            if (lam[i] == 0.0) return std::numeric_limits<double>::infinity();
            acc -= y[i] * std::log(lam[i]);
        }
    }
    return acc;
}

PhotonLevel estimate_photon_level(const Field2D& y, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("estimate_photon_level: beta must be positive");
    const double total = sum(y);
    if (total <= 0.0)
        throw DegenerateInputError("estimate_photon_level: image has no counts");
    return PhotonLevel(total / (beta * static_cast<double>(y.size())));
}

} // namespace pld
