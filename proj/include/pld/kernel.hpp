#pragma once

#include <stdexcept>

#include "pld/field.hpp"

namespace pld {

struct DegenerateKernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Square blur kernel with odd side length, nonnegative entries summing to 1.
// Construct through project_kernel() or the validating constructor.
class BlurKernel {
public:
    explicit BlurKernel(Field2D k);

    int size() const { return field_.height(); }
    double operator()(int r, int c) const { return field_(r, c); }
    const Field2D& field() const { return field_; }

    // Unit mass at the geometric center.
    static BlurKernel delta(int size);

private:
    Field2D field_;
};

// Clip negatives to zero, then normalize to unit sum. Throws
// DegenerateKernelError if nothing positive survives the clip.
BlurKernel project_kernel(const Field2D& raw);

} // namespace pld
