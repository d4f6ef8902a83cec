#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "crossdiff/error.hpp"
#include "crossdiff/image.hpp"

namespace testing {

inline crossdiff::Image random_image(std::size_t w, std::size_t h, std::uint64_t seed, double lo = 0.0,
                                     double hi = 255.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> px(w * h);
  for (double& v : px) v = dist(rng);
  return {w, h, std::move(px)};
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double rel_diff(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double nb = norm2(b);
  return nb == 0.0 ? norm2(d) : norm2(d) / nb;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

template <typename F>
std::optional<crossdiff::ErrorCode> error_of(F&& f) {
  try {
    f();
  } catch (const crossdiff::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testing
