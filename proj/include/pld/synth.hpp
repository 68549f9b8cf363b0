#pragma once

#include <string>

#include "pld/kernel.hpp"

namespace pld {

// Procedural piecewise-smooth test scene: soft-edged shapes over a smooth
// background with mild texture, values kept inside (0, 1). Deterministic for
// a fixed seed.
Field2D make_scene(int height, int width, uint64_t seed);

// Anti-aliased line segment of the given length through the kernel center,
// normalized to unit mass. Motion-blur stand-in.
BlurKernel make_line_kernel(int size, double length, double angleDeg);

// Kernel specs accepted by the CLI and the bench sweep:
//   "delta"
//   "gauss:<sigmaMajor>,<sigmaMinor>,<thetaDeg>"
//   "line:<length>,<angleDeg>"
//   anything else: path to a kernel text file.
BlurKernel parse_kernel_spec(const std::string& spec, int size);

} // namespace pld
