#pragma once

#include <cstddef>

#include "crossdiff/image.hpp"

namespace crossdiff {

struct YaroslavskyConfig {
  double h = 64.0;
  double rho = 4.0;

  /// Window half-width round(2 rho).
  std::size_t half_width() const;
};

/// Range-weighted box average over the square window of half-width
/// round(2 rho), clipped at the image border; the centre pixel is included.
Image yaroslavsky(const Image& img, const YaroslavskyConfig& cfg);

struct NlmConfig {
  /// Standard deviation of the Gaussian patch kernel.
  double sigma = 8.0;
  /// Range scale; 0 selects kappa * sigma.
  double h = 0.0;
  double kappa = 1.0;
  std::size_t patch_radius = 2;
  std::size_t search_radius = 10;

  double effective_h() const { return h > 0.0 ? h : kappa * sigma; }
};

/// Patch-wise Nonlocal Means. For every pixel x a full patch estimate
///   est_x(z) = sum_y w(x,y) u(y+z) / sum_y w(x,y),  w = exp(-M(x,y)/h^2)
/// is formed over the search window, with M the Gaussian-weighted squared
/// patch distance. Each output pixel is the uniform average of the estimates
/// of all patches that cover it. Patches read a mirror-extended image.
Image nlm(const Image& img, const NlmConfig& cfg);

/// Half-sample symmetric reflection of index i into [0, n).
std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n);

}  // namespace crossdiff
