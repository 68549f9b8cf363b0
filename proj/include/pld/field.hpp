#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pld {

// Dense 2-D real field, row-major.
class Field2D {
public:
    Field2D() = default;

    Field2D(int height, int width, double value = 0.0)
        : h_(height), w_(width), data_(static_cast<size_t>(height) * width, value) {
        if (height <= 0 || width <= 0)
            throw std::invalid_argument("Field2D: dimensions must be positive");
    }

    Field2D(int height, int width, std::vector<double> data)
        : h_(height), w_(width), data_(std::move(data)) {
        if (height <= 0 || width <= 0)
            throw std::invalid_argument("Field2D: dimensions must be positive");
        if (data_.size() != static_cast<size_t>(h_) * w_)
            throw std::invalid_argument("Field2D: data length does not match dimensions");
    }

    int height() const { return h_; }
    int width() const { return w_; }
    size_t size() const { return data_.size(); }

    double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * w_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * w_ + c]; }
    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool sameShape(const Field2D& o) const { return h_ == o.h_ && w_ == o.w_; }

private:
    int h_ = 0;
    int w_ = 0;
    std::vector<double> data_;
};

// ---- elementwise algebra ------------------------------------------------

inline void requireSameShape(const Field2D& a, const Field2D& b, const char* what) {
    if (!a.sameShape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

inline Field2D operator+(const Field2D& a, const Field2D& b) {
    requireSameShape(a, b, "operator+");
    Field2D out(a.height(), a.width());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Field2D operator-(const Field2D& a, const Field2D& b) {
    requireSameShape(a, b, "operator-");
    Field2D out(a.height(), a.width());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

// Hadamard product
inline Field2D operator*(const Field2D& a, const Field2D& b) {
    requireSameShape(a, b, "operator*");
    Field2D out(a.height(), a.width());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

inline Field2D operator*(double s, const Field2D& a) {
    Field2D out(a.height(), a.width());
    for (size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
    return out;
}

inline Field2D& operator+=(Field2D& a, const Field2D& b) {
    requireSameShape(a, b, "operator+=");
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline double sum(const Field2D& a) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i];
    return s;
}

inline double mean(const Field2D& a) { return sum(a) / static_cast<double>(a.size()); }

inline double maxAbs(const Field2D& a) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i]));
    return m;
}

inline Field2D clip(const Field2D& a, double lo, double hi) {
    Field2D out(a.height(), a.width());
    for (size_t i = 0; i < a.size(); ++i) out[i] = std::clamp(a[i], lo, hi);
    return out;
}

inline bool allFinite(const Field2D& a) {
    for (size_t i = 0; i < a.size(); ++i)
        if (!std::isfinite(a[i])) return false;
    return true;
}

// ---- boundary handling --------------------------------------------------

// Edge-inclusive mirror padding: a row [1,2,3] padded by one on each side
// becomes [1,1,2,3,3]. Pad amounts must not exceed the source dimension.
Field2D pad_symmetric(const Field2D& img, int top, int bottom, int left, int right);

// Centered crop with offset floor((H-outH)/2), floor((W-outW)/2).
Field2D crop_center(const Field2D& img, int outH, int outW);

} // namespace pld
