#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "pld/field.hpp"
#include "pld/kernel.hpp"

namespace pld {

using Spectrum = std::vector<std::complex<double>>;

// Real 2-D FFT plans for one grid size. forward() maps an HxW field to its
// half-plane r2c spectrum of H*(W/2+1) bins; inverse() applies the 1/(H*W)
// normalization so inverse(forward(f)) == f up to rounding.
class FftGrid {
public:
    FftGrid(int height, int width);
    ~FftGrid();
    FftGrid(const FftGrid&) = delete;
    FftGrid& operator=(const FftGrid&) = delete;

    int height() const { return h_; }
    int width() const { return w_; }
    size_t spectrumSize() const { return static_cast<size_t>(h_) * wHalf_; }

    Spectrum forward(const Field2D& f) const;
    Field2D inverse(const Spectrum& s) const;

private:
    int h_, w_, wHalf_;
    double* real_;
    void* cplx_; // fftw_complex*
    void* fwd_;  // fftw_plan
    void* inv_;
    mutable std::mutex mu_; // plans share scratch buffers
};

inline Spectrum spectrumMultiply(const Spectrum& a, const Spectrum& b) {
    Spectrum out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

// a * conj(b): the spectrum of a circular correlation.
inline Spectrum spectrumMultiplyConj(const Spectrum& a, const Spectrum& b) {
    Spectrum out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * std::conj(b[i]);
    return out;
}

// Kernel placement convention: entry (p,q) of an MxM kernel corresponds to
// the displacement (p-c, q-c) with c = (M-1)/2, wrapped onto the image grid
// so that index (0,0) holds the kernel center. A delta kernel therefore
// convolves to the exact identity.
Field2D embed_kernel(const Field2D& kernel, int imageH, int imageW);

// Inverse of the embedding: read the MxM centered window out of a full-size
// field of displacement values.
Field2D window_kernel(const Field2D& full, int kernelSize);

// Frequency-domain kernel representation reusable across images of one size.
class ConvPlan {
public:
    ConvPlan(int imageH, int imageW, const Field2D& kernel);
    ConvPlan(int imageH, int imageW, const BlurKernel& kernel);

    int imageH() const { return grid_->height(); }
    int imageW() const { return grid_->width(); }
    int kernelSize() const { return kernelSize_; }

    // Periodic convolution: out(i) = sum_j h(j) img(i-j mod dims).
    Field2D convolve(const Field2D& img) const;
    // Adjoint of convolve; equals convolution with the 180-degree rotated
    // kernel: out(i) = sum_j h(j) img(i+j mod dims).
    Field2D correlate(const Field2D& img) const;

    const FftGrid& grid() const { return *grid_; }
    const Spectrum& kernelSpectrum() const { return kspec_; }

private:
    std::shared_ptr<FftGrid> grid_;
    Spectrum kspec_;
    int kernelSize_;
};

Field2D convolve_circular(const Field2D& img, const BlurKernel& h);
Field2D correlate_circular(const Field2D& img, const BlurKernel& h);

// Mirror-pad by (M-1)/2 on each side, convolve circularly, crop back.
Field2D convolve_symmetric(const Field2D& img, const BlurKernel& h);

// Nested-sum periodic convolution. Test oracle for the FFT path; intended
// for small inputs.
Field2D direct_convolve_oracle(const Field2D& img, const BlurKernel& h);
Field2D direct_convolve_oracle(const Field2D& img, const Field2D& kernel);

// Gradient of a convolution output with respect to the MxM kernel.
// kernel_grad_conv: given zbar = dLoss/d(h (*) x), returns
//   g(j) = sum_i zbar(i) x(i-j)  over centered kernel displacements j.
// kernel_grad_corr is the analogue for the correlation direction:
//   g(j) = sum_i sbar(i) r(i+j).
Field2D kernel_grad_conv(const FftGrid& grid, const Field2D& zbar, const Field2D& x, int kernelSize);
Field2D kernel_grad_corr(const FftGrid& grid, const Field2D& sbar, const Field2D& r, int kernelSize);

} // namespace pld
