#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "crossdiff/image.hpp"

namespace crossdiff {

/// Parses an ASCII (P2) or binary (P5) PGM. Samples are returned as read,
/// without rescaling by maxval. Comments ('#' to end of line) are accepted
/// anywhere in the header.
Image load_pgm(std::span<const std::uint8_t> bytes);

/// Encodes as P5 (binary=true) or P2 with maxval 255. Pixels are rounded to
/// the nearest integer and clamped to [0, 255].
std::vector<std::uint8_t> save_pgm(const Image& img, bool binary = true);

Image read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const Image& img, bool binary = true);

}  // namespace crossdiff
