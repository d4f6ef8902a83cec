#include "crossdiff/patch.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "crossdiff/error.hpp"

namespace crossdiff {

namespace {

struct Pair {
  double num = 0.0;
  double den = 0.0;

  Pair operator+(const Pair& o) const { return {num + o.num, den + o.den}; }
};

// Sums f(dx, dy) over [-r, r]^2. Terms related by a horizontal or vertical
// mirror are combined first, so mirroring the input only swaps the operands
// of commutative additions and the rounded result is unchanged.
template <typename T, typename F>
T symmetric_sum(std::ptrdiff_t r, F&& f) {
  T total = f(0, 0);
  for (std::ptrdiff_t dy = 0; dy <= r; ++dy) {
    for (std::ptrdiff_t dx = 0; dx <= r; ++dx) {
      if (dx == 0 && dy == 0) continue;
      if (dy == 0) {
        total = total + (f(dx, 0) + f(-dx, 0));
      } else if (dx == 0) {
        total = total + (f(0, dy) + f(0, -dy));
      } else {
        total = total + ((f(dx, dy) + f(-dx, dy)) + (f(dx, -dy) + f(-dx, -dy)));
      }
    }
  }
  return total;
}

// Image padded by `pad` pixels of mirror extension on every side.
class PaddedImage {
 public:
  PaddedImage(const Image& img, std::ptrdiff_t pad)
      : w_(static_cast<std::ptrdiff_t>(img.width())), h_(static_cast<std::ptrdiff_t>(img.height())), pad_(pad),
        stride_(w_ + 2 * pad), data_(static_cast<std::size_t>(stride_ * (h_ + 2 * pad))) {
    for (std::ptrdiff_t y = -pad; y < h_ + pad; ++y)
      for (std::ptrdiff_t x = -pad; x < w_ + pad; ++x)
        data_[index(x, y)] = img(static_cast<std::size_t>(reflect_index(x, w_)),
                                 static_cast<std::size_t>(reflect_index(y, h_)));
  }

  double operator()(std::ptrdiff_t x, std::ptrdiff_t y) const { return data_[index(x, y)]; }

 private:
  std::size_t index(std::ptrdiff_t x, std::ptrdiff_t y) const {
    return static_cast<std::size_t>((y + pad_) * stride_ + (x + pad_));
  }

  std::ptrdiff_t w_, h_, pad_, stride_;
  std::vector<double> data_;
};

}  // namespace

std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

std::size_t YaroslavskyConfig::half_width() const {
  return static_cast<std::size_t>(std::llround(2.0 * rho));
}

Image yaroslavsky(const Image& img, const YaroslavskyConfig& cfg) {
  if (!(cfg.h > 0.0)) throw Error(ErrorCode::InvalidArgument, "range scale h must be positive");
  if (!(cfg.rho > 0.0) || cfg.half_width() < 1) {
    throw Error(ErrorCode::InvalidArgument, "window scale rho must give a half-width of at least 1");
  }
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto r = static_cast<std::ptrdiff_t>(cfg.half_width());
  const double inv_h2 = 1.0 / (cfg.h * cfg.h);
  const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());

  Image out(img.width(), img.height());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      const double centre = img(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      const Pair acc = symmetric_sum<Pair>(r, [&](std::ptrdiff_t dx, std::ptrdiff_t dy) -> Pair {
        const std::ptrdiff_t xx = x + dx, yy = y + dy;
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) return {};
        const double v = img(static_cast<std::size_t>(xx), static_cast<std::size_t>(yy));
        const double d = centre - v;
        const double wt = std::exp(-d * d * inv_h2);
        return {wt * v, wt};
      });
      out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = std::clamp(acc.num / acc.den, *lo, *hi);
    }
  }
  return out;
}

Image nlm(const Image& img, const NlmConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  const double range = cfg.effective_h();
  if (!(range > 0.0)) throw Error(ErrorCode::InvalidArgument, "h must be positive");
  if (cfg.patch_radius == 0 || cfg.search_radius == 0) {
    throw Error(ErrorCode::InvalidArgument, "patch and search radii must be positive");
  }

  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto pr = static_cast<std::ptrdiff_t>(cfg.patch_radius);
  const auto sr = static_cast<std::ptrdiff_t>(cfg.search_radius);
  const std::ptrdiff_t side = 2 * pr + 1;
  const std::size_t patch_size = static_cast<std::size_t>(side * side);
  auto zi = [&](std::ptrdiff_t dx, std::ptrdiff_t dy) { return static_cast<std::size_t>((dy + pr) * side + dx + pr); };

  std::vector<double> kernel(patch_size);
  for (std::ptrdiff_t dy = -pr; dy <= pr; ++dy)
    for (std::ptrdiff_t dx = -pr; dx <= pr; ++dx)
      kernel[zi(dx, dy)] = std::exp(-static_cast<double>(dx * dx + dy * dy) / (2.0 * cfg.sigma * cfg.sigma));
  const double kernel_sum = symmetric_sum<double>(pr, [&](auto dx, auto dy) { return kernel[zi(dx, dy)]; });
  for (double& k : kernel) k /= kernel_sum;

  const PaddedImage ext(img, pr);
  const double inv_h2 = 1.0 / (range * range);

  // est[x * patch_size + zi(z)] is the estimate patch x proposes for x + z.
  std::vector<double> est(img.size() * patch_size);
  std::vector<double> weights(static_cast<std::size_t>((2 * sr + 1) * (2 * sr + 1)));
  auto wi = [&](std::ptrdiff_t dx, std::ptrdiff_t dy) {
    return static_cast<std::size_t>((dy + sr) * (2 * sr + 1) + dx + sr);
  };

  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      for (std::ptrdiff_t oy = -sr; oy <= sr; ++oy) {
        for (std::ptrdiff_t ox = -sr; ox <= sr; ++ox) {
          const std::ptrdiff_t cx = x + ox, cy = y + oy;
          if (cx < 0 || cy < 0 || cx >= w || cy >= h) {
            weights[wi(ox, oy)] = 0.0;
            continue;
          }
          const double dist = symmetric_sum<double>(pr, [&](std::ptrdiff_t dx, std::ptrdiff_t dy) {
            const double d = ext(x + dx, y + dy) - ext(cx + dx, cy + dy);
            return kernel[zi(dx, dy)] * d * d;
          });
          weights[wi(ox, oy)] = std::exp(-dist * inv_h2);
        }
      }
      const double norm = symmetric_sum<double>(sr, [&](auto ox, auto oy) { return weights[wi(ox, oy)]; });
      double* patch_est = &est[static_cast<std::size_t>(y * w + x) * patch_size];
      for (std::ptrdiff_t dy = -pr; dy <= pr; ++dy) {
        for (std::ptrdiff_t dx = -pr; dx <= pr; ++dx) {
          const double num = symmetric_sum<double>(sr, [&](std::ptrdiff_t ox, std::ptrdiff_t oy) {
            const double wt = weights[wi(ox, oy)];
            return wt == 0.0 ? 0.0 : wt * ext(x + ox + dx, y + oy + dy);
          });
          patch_est[zi(dx, dy)] = num / norm;
        }
      }
    }
  }

  // Convex combinations of pixel values; the clamp only strips rounding.
  const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  Image out(img.width(), img.height());
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      // Patch centred at x - z covers x at its offset z.
      const Pair acc = symmetric_sum<Pair>(pr, [&](std::ptrdiff_t dx, std::ptrdiff_t dy) -> Pair {
        const std::ptrdiff_t px = x - dx, py = y - dy;
        if (px < 0 || py < 0 || px >= w || py >= h) return {};
        return {est[static_cast<std::size_t>(py * w + px) * patch_size + zi(dx, dy)], 1.0};
      });
      out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = std::clamp(acc.num / acc.den, *lo, *hi);
    }
  }
  return out;
}

}  // namespace crossdiff
