#pragma once

#include <stdexcept>
#include <string>

#include "pld/kernel.hpp"

namespace pld {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Grayscale 8/16-bit PNG and ASCII PGM (P2), dispatched on file extension.
//
// Latent images are normalized to [0,1] by the container maximum; observed
// images hold raw Poisson counts and are stored as 16-bit values losslessly
// (counts above 65535 are rejected).
Field2D read_image_latent(const std::string& path);
Field2D read_image_counts(const std::string& path);
void write_image_latent(const std::string& path, const Field2D& img);
void write_image_counts(const std::string& path, const Field2D& counts);

// Kernel text format: "M\n" followed by M rows of M space-separated decimals.
void save_kernel_text(const std::string& path, const BlurKernel& k);
BlurKernel load_kernel_text(const std::string& path);

} // namespace pld
