#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "crossdiff/image.hpp"
#include "crossdiff/patch.hpp"

// Dense reference implementations used to cross-check the library.
namespace oracle {

// Bilinear basis on the unit square, local order (0,0) (1,0) (0,1) (1,1).
inline double phi(int k, double x, double y) {
  const double bx = (k & 1) ? x : 1.0 - x;
  const double by = (k & 2) ? y : 1.0 - y;
  return bx * by;
}

inline std::array<double, 2> grad_phi(int k, double x, double y) {
  const double sx = (k & 1) ? 1.0 : -1.0;
  const double sy = (k & 2) ? 1.0 : -1.0;
  const double bx = (k & 1) ? x : 1.0 - x;
  const double by = (k & 2) ? y : 1.0 - y;
  return {sx * by, sy * bx};
}

inline const double kLo = 0.5 - 0.5 / std::sqrt(3.0);
inline const double kHi = 0.5 + 0.5 / std::sqrt(3.0);
inline const std::array<std::array<double, 2>, 4> kPoints = {{{kLo, kLo}, {kHi, kLo}, {kLo, kHi}, {kHi, kHi}}};

// Dense g-weighted stiffness assembled cell by cell from the basis above.
inline std::vector<double> dense_stiffness(std::size_t nx, std::size_t ny, const std::vector<double>& gq) {
  const std::size_t n = nx * ny;
  std::vector<double> k(n * n, 0.0);
  std::size_t cell = 0;
  for (std::size_t cy = 0; cy + 1 < ny; ++cy) {
    for (std::size_t cx = 0; cx + 1 < nx; ++cx, ++cell) {
      const std::size_t nodes[4] = {cy * nx + cx, cy * nx + cx + 1, (cy + 1) * nx + cx, (cy + 1) * nx + cx + 1};
      for (int q = 0; q < 4; ++q) {
        const double g = gq[4 * cell + q];
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            const auto ga = grad_phi(a, kPoints[q][0], kPoints[q][1]);
            const auto gb = grad_phi(b, kPoints[q][0], kPoints[q][1]);
            k[nodes[a] * n + nodes[b]] += 0.25 * g * (ga[0] * gb[0] + ga[1] * gb[1]);
          }
      }
    }
  }
  return k;
}

inline Eigen::MatrixXd to_eigen(const std::vector<double>& dense, std::size_t n) {
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = dense[i * n + j];
  return a;
}

// One backward-Euler heat step (M/tau + K) u = M u0 / tau with g = 1.
inline std::vector<double> heat_step(std::size_t nx, std::size_t ny, const std::vector<double>& mass,
                                     const std::vector<double>& u0, double tau) {
  const std::size_t n = nx * ny;
  const auto k = dense_stiffness(nx, ny, std::vector<double>(4 * (nx - 1) * (ny - 1), 1.0));
  Eigen::MatrixXd a = to_eigen(k, n);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) += mass[i] / tau;
    b(i) = mass[i] * u0[i] / tau;
  }
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  return {x.data(), x.data() + n};
}

inline long mirror(long i, long n) {
  // Half-sample symmetric extension: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

inline double box_mean(const crossdiff::Image& img, long x, long y, long r) {
  double s = 0.0;
  int count = 0;
  for (long yy = std::max(0L, y - r); yy <= std::min<long>(img.height() - 1, y + r); ++yy)
    for (long xx = std::max(0L, x - r); xx <= std::min<long>(img.width() - 1, x + r); ++xx) {
      s += img(xx, yy);
      ++count;
    }
  return s / count;
}

// Exhaustive patch-wise NLM: every in-image patch centre c proposes, for each
// offset z, the weighted average of u(y + z) over its search window; pixel p
// averages the proposals of all centres within the patch radius.
inline crossdiff::Image nlm_oracle(const crossdiff::Image& u, const crossdiff::NlmConfig& cfg) {
  const long w = u.width(), h = u.height();
  const long pr = cfg.patch_radius, sr = cfg.search_radius;
  const double hh = cfg.effective_h();
  auto at = [&](long x, long y) { return u(mirror(x, w), mirror(y, h)); };
  std::vector<double> kernel;
  double ksum = 0.0;
  for (long dy = -pr; dy <= pr; ++dy)
    for (long dx = -pr; dx <= pr; ++dx) {
      kernel.push_back(std::exp(-(dx * dx + dy * dy) / (2 * cfg.sigma * cfg.sigma)));
      ksum += kernel.back();
    }
  for (double& k : kernel) k /= ksum;
  auto weight = [&](long cx, long cy, long yx, long yy) {
    double d = 0.0;
    std::size_t i = 0;
    for (long dy = -pr; dy <= pr; ++dy)
      for (long dx = -pr; dx <= pr; ++dx, ++i) {
        const double diff = at(cx + dx, cy + dy) - at(yx + dx, yy + dy);
        d += kernel[i] * diff * diff;
      }
    return std::exp(-d / (hh * hh));
  };
  crossdiff::Image out(u.width(), u.height());
  for (long py = 0; py < h; ++py)
    for (long px = 0; px < w; ++px) {
      double acc = 0.0;
      int covers = 0;
      for (long cy = py - pr; cy <= py + pr; ++cy)
        for (long cx = px - pr; cx <= px + pr; ++cx) {
          if (cx < 0 || cy < 0 || cx >= w || cy >= h) continue;
          double num = 0.0, den = 0.0;
          for (long yy = cy - sr; yy <= cy + sr; ++yy)
            for (long yx = cx - sr; yx <= cx + sr; ++yx) {
              if (yx < 0 || yy < 0 || yx >= w || yy >= h) continue;
              const double wt = weight(cx, cy, yx, yy);
              num += wt * at(yx + (px - cx), yy + (py - cy));
              den += wt;
            }
          acc += num / den;
          ++covers;
        }
      out(px, py) = acc / covers;
    }
  return out;
}

}  // namespace oracle
