#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "crossdiff/image.hpp"

namespace crossdiff {

enum class SyntheticKind { Shapes, Texture };

/// Stand-in test images.
///  - Shapes: flat background with overlapping rectangles and disks, every
///    level drawn from {32, 56, ..., 224}.
///  - Texture: oriented high-frequency sinusoids plus seeded speckle,
///    rescaled to [0, 255].
/// Deterministic per seed. Throws TooSmall for size < 32.
Image generate_synthetic(SyntheticKind kind, std::size_t size, std::uint64_t seed);

SyntheticKind synthetic_kind_from_string(const std::string& name);
std::string to_string(SyntheticKind kind);

}  // namespace crossdiff
