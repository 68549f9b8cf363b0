#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "pld/fft_conv.hpp"

namespace pld {

struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mean photons per unit normalized intensity.
struct PhotonLevel {
    double alpha;
    explicit PhotonLevel(double a) : alpha(a) {
        if (!(a > 0.0)) throw std::invalid_argument("PhotonLevel: alpha must be positive");
    }
};

// Exact seeded Poisson sampler: inversion by sequential search below mean 30,
// transformed rejection (PTRS) above. Bit-reproducible for a fixed seed; the
// uniforms come straight off mt19937_64 so the stream does not depend on the
// standard library's distribution internals.
class PoissonSampler {
public:
    explicit PoissonSampler(uint64_t seed) : rng_(seed) {}

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    long draw(double mean);

private:
    long drawSmall(double mean);
    long drawPtrs(double mean);
    std::mt19937_64 rng_;
};

// y = Poisson(alpha * (h (*) x)), independent per pixel, circular boundary.
Field2D simulate(const Field2D& x, const BlurKernel& h, PhotonLevel alpha, uint64_t seed);

// sum_i lam(i) - y(i)*log(lam(i)), with 0*log(0) = 0. Returns +infinity when
// some y(i) > 0 meets lam(i) == 0.
double poisson_nll(const Field2D& y, const Field2D& lam);

// alpha-hat = sum(y) / (beta * N).
PhotonLevel estimate_photon_level(const Field2D& y, double beta = 0.33);

} // namespace pld
