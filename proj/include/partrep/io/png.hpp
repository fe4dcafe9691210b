#pragma once

#include <string>

#include "partrep/core/image.hpp"

namespace partrep::io {

// Minimal PNG support for the artifact's own outputs: 8-bit RGB or
// grayscale, non-interlaced, zlib-compressed with fixed settings so
// identical pixels produce identical files.

void write_png_rgb(const std::string& path, const RgbImage& img);
void write_png_gray(const std::string& path, const GrayImage& img);

/// Reads an 8-bit RGB or grayscale PNG (grayscale expands to RGB).
RgbImage read_png_rgb(const std::string& path);

}  // namespace partrep::io
