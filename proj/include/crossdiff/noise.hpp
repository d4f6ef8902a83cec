#pragma once

#include <cstdint>

#include "crossdiff/image.hpp"

namespace crossdiff {

struct NoiseSpec {
  double target_snr = 10.0;
  std::uint64_t seed = 0;
};

/// Standard deviation of the additive noise that realizes spec.target_snr
/// for this image: sigma(img) / target_snr.
double noise_sigma(const Image& img, const NoiseSpec& spec);

/// Returns img + n, n i.i.d. N(0, noise_sigma^2). The result is not clamped.
/// Throws ConstantImage when sigma(img) == 0.
Image add_gaussian_noise(const Image& img, const NoiseSpec& spec);

}  // namespace crossdiff
