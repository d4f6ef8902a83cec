#include "crossdiff/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "crossdiff/error.hpp"

namespace crossdiff {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
};

Image shapes(std::size_t size, Rng& rng) {
  std::array<double, 9> levels{};
  for (std::size_t i = 0; i < levels.size(); ++i) levels[i] = 32.0 + 24.0 * static_cast<double>(i);
  for (std::size_t i = levels.size() - 1; i > 0; --i) std::swap(levels[i], levels[rng.index(i + 1)]);

  const double s = static_cast<double>(size);
  Image img(size, size, levels[0]);
  constexpr int kShapes = 10;
  for (int k = 0; k < kShapes; ++k) {
    const double level = levels[1 + static_cast<std::size_t>(k) % (levels.size() - 1)];
    if (k % 2 == 0) {
      const double w = rng.uniform(s / 8, s / 3), h = rng.uniform(s / 8, s / 3);
      const double x0 = rng.uniform(0, s - w), y0 = rng.uniform(0, s - h);
      for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x)
          if (x >= x0 && x < x0 + w && y >= y0 && y < y0 + h) img(x, y) = level;
    } else {
      const double r = rng.uniform(s / 16, s / 6);
      const double cx = rng.uniform(r, s - r), cy = rng.uniform(r, s - r);
      for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) {
          const double dx = static_cast<double>(x) + 0.5 - cx, dy = static_cast<double>(y) + 0.5 - cy;
          if (dx * dx + dy * dy <= r * r) img(x, y) = level;
        }
    }
  }
  return img;
}

Image texture(std::size_t size, Rng& rng) {
  struct Wave {
    double kx, ky, phase, amp;
  };
  std::array<Wave, 4> waves{};
  for (auto& wv : waves) {
    const double angle = rng.uniform(0, std::numbers::pi);
    const double freq = rng.uniform(0.9, 2.2);  // radians per pixel
    wv = {freq * std::cos(angle), freq * std::sin(angle), rng.uniform(0, 2 * std::numbers::pi),
          rng.uniform(0.6, 1.0)};
  }
  constexpr double kSpeckle = 0.6;
  Image img(size, size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      double v = 0.0;
      for (const auto& wv : waves)
        v += wv.amp * std::sin(wv.kx * static_cast<double>(x) + wv.ky * static_cast<double>(y) + wv.phase);
      v += kSpeckle * (2.0 * rng.uniform() - 1.0);
      img(x, y) = v;
    }
  }
  const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  const double min = *lo, range = *hi - *lo;
  for (double& v : img.pixels()) v = 255.0 * (v - min) / range;
  return img;
}

}  // namespace

Image generate_synthetic(SyntheticKind kind, std::size_t size, std::uint64_t seed) {
  if (size < 32) throw Error(ErrorCode::TooSmall, "synthetic images must be at least 32x32");
  Rng rng(seed);
  return kind == SyntheticKind::Shapes ? shapes(size, rng) : texture(size, rng);
}

SyntheticKind synthetic_kind_from_string(const std::string& name) {
  if (name == "shapes") return SyntheticKind::Shapes;
  if (name == "texture") return SyntheticKind::Texture;
  throw Error(ErrorCode::InvalidArgument, "unknown synthetic kind '" + name + "'");
}

std::string to_string(SyntheticKind kind) { return kind == SyntheticKind::Shapes ? "shapes" : "texture"; }

}  // namespace crossdiff
