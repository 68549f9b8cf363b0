#include "pld/fft_conv.hpp"

#include <cstring>

#include <fftw3.h>

namespace pld {

namespace {

// FFTW plan creation is not thread-safe; execution through the new-array
// interface is.
std::mutex& plannerMutex() {
    static std::mutex m;
    return m;
}

} // namespace

FftGrid::FftGrid(int height, int width) : h_(height), w_(width), wHalf_(width / 2 + 1) {
    if (height <= 0 || width <= 0)
        throw std::invalid_argument("FftGrid: dimensions must be positive");
    real_ = fftw_alloc_real(static_cast<size_t>(h_) * w_);
    cplx_ = fftw_alloc_complex(static_cast<size_t>(h_) * wHalf_);
    std::lock_guard<std::mutex> lock(plannerMutex());
    fwd_ = fftw_plan_dft_r2c_2d(h_, w_, real_, static_cast<fftw_complex*>(cplx_), FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_2d(h_, w_, static_cast<fftw_complex*>(cplx_), real_, FFTW_ESTIMATE);
}

FftGrid::~FftGrid() {
    std::lock_guard<std::mutex> lock(plannerMutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    fftw_free(real_);
    fftw_free(cplx_);
}

Spectrum FftGrid::forward(const Field2D& f) const {
    if (f.height() != h_ || f.width() != w_)
        throw std::invalid_argument("FftGrid::forward: shape mismatch");
    std::lock_guard<std::mutex> lock(mu_);
    std::memcpy(real_, f.data().data(), f.size() * sizeof(double));
    fftw_execute(static_cast<fftw_plan>(fwd_));
    Spectrum out(spectrumSize());
    std::memcpy(out.data(), cplx_, out.size() * sizeof(fftw_complex));
    return out;
}

Field2D FftGrid::inverse(const Spectrum& s) const {
    if (s.size() != spectrumSize())
        throw std::invalid_argument("FftGrid::inverse: spectrum size mismatch");
    std::lock_guard<std::mutex> lock(mu_);
    std::memcpy(cplx_, s.data(), s.size() * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(inv_));
    Field2D out(h_, w_);
    const double scale = 1.0 / (static_cast<double>(h_) * w_);
    for (size_t i = 0; i < out.size(); ++i) out[i] = real_[i] * scale;
    return out;
}

Field2D embed_kernel(const Field2D& kernel, int imageH, int imageW) {
    const int m = kernel.height();
    if (kernel.width() != m)
        throw std::invalid_argument("embed_kernel: kernel must be square");
    if (m > imageH || m > imageW)
        throw std::invalid_argument("embed_kernel: kernel larger than image");
    const int c = (m - 1) / 2;
    Field2D out(imageH, imageW, 0.0);
    for (int p = 0; p < m; ++p) {
        const int r = ((p - c) % imageH + imageH) % imageH;
        for (int q = 0; q < m; ++q) {
            const int cc = ((q - c) % imageW + imageW) % imageW;
            out(r, cc) = kernel(p, q);
        }
    }
    return out;
}

Field2D window_kernel(const Field2D& full, int kernelSize) {
    const int h = full.height(), w = full.width();
    if (kernelSize > h || kernelSize > w)
        throw std::invalid_argument("window_kernel: kernel larger than field");
    const int c = (kernelSize - 1) / 2;
    Field2D out(kernelSize, kernelSize);
    for (int p = 0; p < kernelSize; ++p) {
        const int r = ((p - c) % h + h) % h;
        for (int q = 0; q < kernelSize; ++q) {
            const int cc = ((q - c) % w + w) % w;
            out(p, q) = full(r, cc);
        }
    }
    return out;
}

ConvPlan::ConvPlan(int imageH, int imageW, const Field2D& kernel)
    : grid_(std::make_shared<FftGrid>(imageH, imageW)), kernelSize_(kernel.height()) {
    if (kernel.height() != kernel.width())
        throw std::invalid_argument("ConvPlan: kernel must be square");
    if (kernelSize_ > imageH || kernelSize_ > imageW)
        throw std::invalid_argument("ConvPlan: kernel larger than image");
    kspec_ = grid_->forward(embed_kernel(kernel, imageH, imageW));
}

ConvPlan::ConvPlan(int imageH, int imageW, const BlurKernel& kernel)
    : ConvPlan(imageH, imageW, kernel.field()) {}

Field2D ConvPlan::convolve(const Field2D& img) const {
    return grid_->inverse(spectrumMultiply(grid_->forward(img), kspec_));
}

Field2D ConvPlan::correlate(const Field2D& img) const {
    return grid_->inverse(spectrumMultiplyConj(grid_->forward(img), kspec_));
}

Field2D convolve_circular(const Field2D& img, const BlurKernel& h) {
    return ConvPlan(img.height(), img.width(), h).convolve(img);
}

Field2D correlate_circular(const Field2D& img, const BlurKernel& h) {
    return ConvPlan(img.height(), img.width(), h).correlate(img);
}

Field2D convolve_symmetric(const Field2D& img, const BlurKernel& h) {
    const int pad = (h.size() - 1) / 2;
    const Field2D padded = pad_symmetric(img, pad, pad, pad, pad);
    const Field2D conv = ConvPlan(padded.height(), padded.width(), h).convolve(padded);
    return crop_center(conv, img.height(), img.width());
}

Field2D direct_convolve_oracle(const Field2D& img, const Field2D& kernel) {
    const int h = img.height(), w = img.width();
    const int m = kernel.height();
    if (kernel.width() != m)
        throw std::invalid_argument("direct_convolve_oracle: kernel must be square");
    if (m > h || m > w)
        throw std::invalid_argument("direct_convolve_oracle: kernel larger than image");
    const int c = (m - 1) / 2;
    Field2D out(h, w, 0.0);
    for (int r = 0; r < h; ++r)
        for (int col = 0; col < w; ++col) {
            double acc = 0.0;
            for (int p = 0; p < m; ++p) {
                const int sr = ((r - (p - c)) % h + h) % h;
                for (int q = 0; q < m; ++q) {
                    const int sc = ((col - (q - c)) % w + w) % w;
                    acc += kernel(p, q) * img(sr, sc);
                }
            }
            out(r, col) = acc;
        }
    return out;
}

Field2D direct_convolve_oracle(const Field2D& img, const BlurKernel& h) {
    return direct_convolve_oracle(img, h.field());
}

Field2D kernel_grad_conv(const FftGrid& grid, const Field2D& zbar, const Field2D& x, int kernelSize) {
    // sum_i zbar(i) x(i-j) is the circular convolution of zbar with the
    // reversal of x, i.e. IFFT(FFT(zbar) * conj(FFT(x))).
    const Field2D full = grid.inverse(spectrumMultiplyConj(grid.forward(zbar), grid.forward(x)));
    return window_kernel(full, kernelSize);
}

Field2D kernel_grad_corr(const FftGrid& grid, const Field2D& sbar, const Field2D& r, int kernelSize) {
    // sum_i sbar(i) r(i+j) = IFFT(conj(FFT(sbar)) * FFT(r)).
    const Field2D full = grid.inverse(spectrumMultiplyConj(grid.forward(r), grid.forward(sbar)));
    return window_kernel(full, kernelSize);
}

} // namespace pld
