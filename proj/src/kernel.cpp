#include "pld/kernel.hpp"

#include <cmath>

namespace pld {

BlurKernel::BlurKernel(Field2D k) : field_(std::move(k)) {
    if (field_.height() != field_.width())
        throw std::invalid_argument("BlurKernel: kernel must be square");
    if (field_.height() % 2 == 0)
        throw std::invalid_argument("BlurKernel: kernel side must be odd");
    double s = 0.0;
    for (size_t i = 0; i < field_.size(); ++i) {
        if (!std::isfinite(field_[i]) || field_[i] < 0.0)
            throw std::invalid_argument("BlurKernel: entries must be finite and nonnegative");
        s += field_[i];
    }
    if (std::fabs(s - 1.0) > 1e-9)
        throw std::invalid_argument("BlurKernel: entries must sum to 1");
}

BlurKernel BlurKernel::delta(int size) {
    Field2D f(size, size, 0.0);
    f(size / 2, size / 2) = 1.0;
    return BlurKernel(std::move(f));
}

BlurKernel project_kernel(const Field2D& raw) {
    if (raw.height() != raw.width())
        throw std::invalid_argument("project_kernel: kernel must be square");
    if (raw.height() % 2 == 0)
        throw std::invalid_argument("project_kernel: kernel side must be odd");

    Field2D k(raw.height(), raw.width());
    double s = 0.0;
    for (size_t i = 0; i < raw.size(); ++i) {
        if (!std::isfinite(raw[i]))
            throw std::invalid_argument("project_kernel: non-finite entry");
        k[i] = raw[i] > 0.0 ? raw[i] : 0.0;
        s += k[i];
    }
    if (s <= 0.0)
        throw DegenerateKernelError("project_kernel: kernel is nonpositive everywhere");
    for (size_t i = 0; i < k.size(); ++i) k[i] /= s;
    return BlurKernel(std::move(k));
}

} // namespace pld
