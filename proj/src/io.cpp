#include "pld/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <png.h>

namespace pld {

namespace {

bool hasSuffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct RawImage {
    int height = 0, width = 0;
    int maxValue = 0;
    std::vector<double> pixels;
};

RawImage readPng(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("failed to decode " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const int colorType = png_get_color_type(png, info);
    const int bitDepth = png_get_bit_depth(png, info);
    if (colorType != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError(path + ": only grayscale PNG is supported");
    }
    if (bitDepth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (bitDepth == 16) png_set_swap(png); // PNG stores big-endian
    png_read_update_info(png, info);

    RawImage out;
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.maxValue = bitDepth == 16 ? 65535 : 255;
    out.pixels.resize(static_cast<size_t>(out.height) * out.width);

    std::vector<png_byte> row(png_get_rowbytes(png, info));
    for (int r = 0; r < out.height; ++r) {
        png_read_row(png, row.data(), nullptr);
        if (bitDepth == 16) {
            const uint16_t* p = reinterpret_cast<const uint16_t*>(row.data());
            for (int c = 0; c < out.width; ++c) out.pixels[static_cast<size_t>(r) * out.width + c] = p[c];
        } else {
            for (int c = 0; c < out.width; ++c) out.pixels[static_cast<size_t>(r) * out.width + c] = row[c];
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return out;
}

void writePng16(const std::string& path, const std::vector<uint16_t>& pixels, int h, int w) {
    FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot open " + path + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("failed to encode " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_set_swap(png);
    for (int r = 0; r < h; ++r)
        png_write_row(png, reinterpret_cast<png_const_bytep>(pixels.data() + static_cast<size_t>(r) * w));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

RawImage readPgm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P2") throw IoError(path + ": expected ASCII PGM (P2)");
    auto nextToken = [&in, &path]() {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        throw IoError(path + ": truncated PGM");
    };
    RawImage out;
    out.width = std::stoi(nextToken());
    out.height = std::stoi(nextToken());
    out.maxValue = std::stoi(nextToken());
    if (out.width <= 0 || out.height <= 0 || out.maxValue <= 0 || out.maxValue > 65535)
        throw IoError(path + ": bad PGM header");
    out.pixels.resize(static_cast<size_t>(out.height) * out.width);
    for (auto& v : out.pixels) v = std::stod(nextToken());
    return out;
}

void writePgm(const std::string& path, const std::vector<uint16_t>& pixels, int h, int w,
              int maxValue) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "P2\n" << w << " " << h << "\n" << maxValue << "\n";
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) out << pixels[static_cast<size_t>(r) * w + c] << (c + 1 < w ? ' ' : '\n');
    }
    if (!out) throw IoError("failed writing " + path);
}

RawImage readAny(const std::string& path) {
    if (hasSuffix(path, ".png")) return readPng(path);
    if (hasSuffix(path, ".pgm")) return readPgm(path);
    throw IoError(path + ": unsupported image format (use .png or .pgm)");
}

std::vector<uint16_t> toCounts(const Field2D& counts) {
    std::vector<uint16_t> px(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
        const double v = counts[i];
        const double rounded = std::round(v);
        if (!(v >= 0.0) || std::fabs(v - rounded) > 1e-6)
            throw IoError("observed image must hold nonnegative integer counts");
        if (rounded > 65535.0)
            throw IoError("count exceeds 65535; cannot store losslessly");
        px[i] = static_cast<uint16_t>(rounded);
    }
    return px;
}

} // namespace

Field2D read_image_latent(const std::string& path) {
    RawImage raw = readAny(path);
    Field2D out(raw.height, raw.width, std::move(raw.pixels));
    const double scale = 1.0 / raw.maxValue;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= scale;
    return out;
}

Field2D read_image_counts(const std::string& path) {
    RawImage raw = readAny(path);
    return Field2D(raw.height, raw.width, std::move(raw.pixels));
}

void write_image_latent(const std::string& path, const Field2D& img) {
    std::vector<uint16_t> px(img.size());
    for (size_t i = 0; i < img.size(); ++i) {
        const double v = std::clamp(img[i], 0.0, 1.0);
        px[i] = static_cast<uint16_t>(std::lround(v * 65535.0));
    }
    if (hasSuffix(path, ".png")) writePng16(path, px, img.height(), img.width());
    else if (hasSuffix(path, ".pgm")) writePgm(path, px, img.height(), img.width(), 65535);
    else throw IoError(path + ": unsupported image format (use .png or .pgm)");
}

void write_image_counts(const std::string& path, const Field2D& counts) {
    const auto px = toCounts(counts);
    if (hasSuffix(path, ".png")) writePng16(path, px, counts.height(), counts.width());
    else if (hasSuffix(path, ".pgm")) writePgm(path, px, counts.height(), counts.width(), 65535);
    else throw IoError(path + ": unsupported image format (use .png or .pgm)");
}

void save_kernel_text(const std::string& path, const BlurKernel& k) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << k.size() << "\n";
    char buf[32];
    for (int r = 0; r < k.size(); ++r) {
        for (int c = 0; c < k.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", k(r, c));
            out << buf << (c + 1 < k.size() ? ' ' : '\n');
        }
    }
    if (!out) throw IoError("failed writing " + path);
}

BlurKernel load_kernel_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    int m = 0;
    if (!(in >> m) || m <= 0 || m % 2 == 0) throw IoError(path + ": bad kernel header");
    Field2D f(m, m);
    for (size_t i = 0; i < f.size(); ++i)
        if (!(in >> f[i])) throw IoError(path + ": truncated kernel file");
    // re-project to absorb text round-off
    return project_kernel(f);
}

} // namespace pld
