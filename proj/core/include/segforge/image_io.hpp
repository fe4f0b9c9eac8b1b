#pragma once

#include <filesystem>

#include "segforge/image.hpp"

namespace segforge {

/// Binary PPM (P6, maxval 255). Values quantized by round(v*255), clamped.
void write_ppm(const std::filesystem::path& path, const Image& image);
/// Loads a P6/maxval-255 PPM, dequantized to [0,1] by /255.
Image read_ppm(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255) holding raw class indices.
void write_pgm(const std::filesystem::path& path, const ClassMask& mask);
/// Loads a P5 PGM; rejects any maxval other than 255.
ClassMask read_pgm(const std::filesystem::path& path);

} // namespace segforge
