#include "pld/field.hpp"

namespace pld {

namespace {

// Reflection index for edge-inclusive mirroring, valid for -n <= i < 2n.
inline int mirrorIndex(int i, int n) {
    if (i < 0) return -1 - i;
    if (i >= n) return 2 * n - 1 - i;
    return i;
}

} // namespace

Field2D pad_symmetric(const Field2D& img, int top, int bottom, int left, int right) {
    const int h = img.height(), w = img.width();
    if (top < 0 || bottom < 0 || left < 0 || right < 0)
        throw std::invalid_argument("pad_symmetric: negative pad amount");
    if (top > h || bottom > h || left > w || right > w)
        throw std::invalid_argument("pad_symmetric: pad amount exceeds image dimension");

    Field2D out(h + top + bottom, w + left + right);
    for (int r = 0; r < out.height(); ++r) {
        const int sr = mirrorIndex(r - top, h);
        for (int c = 0; c < out.width(); ++c) {
            const int sc = mirrorIndex(c - left, w);
            out(r, c) = img(sr, sc);
        }
    }
    return out;
}

Field2D crop_center(const Field2D& img, int outH, int outW) {
    const int h = img.height(), w = img.width();
    if (outH <= 0 || outW <= 0)
        throw std::invalid_argument("crop_center: output dimensions must be positive");
    if (outH > h || outW > w)
        throw std::invalid_argument("crop_center: requested size larger than input");

    const int r0 = (h - outH) / 2;
    const int c0 = (w - outW) / 2;
    Field2D out(outH, outW);
    for (int r = 0; r < outH; ++r)
        for (int c = 0; c < outW; ++c)
            out(r, c) = img(r0 + r, c0 + c);
    return out;
}

} // namespace pld
