#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace crossdiff {

/// Uniform Q1 mesh with one node per pixel and unit spacing. Node p = y*nx + x
/// matches the row-major pixel order of Image. Cell (cx, cy) has its lower
/// left node at (cx, cy); its local nodes are numbered
///   0:(cx,cy)  1:(cx+1,cy)  2:(cx,cy+1)  3:(cx+1,cy+1).
class Grid {
 public:
  Grid(std::size_t nx, std::size_t ny);

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t node_count() const noexcept { return nx_ * ny_; }
  std::size_t cell_count() const noexcept { return (nx_ - 1) * (ny_ - 1); }
  std::size_t cells_x() const noexcept { return nx_ - 1; }
  double spacing() const noexcept { return 1.0; }

  std::size_t node(std::size_t x, std::size_t y) const noexcept { return y * nx_ + x; }
  std::array<std::size_t, 4> cell_nodes(std::size_t cell) const noexcept {
    const std::size_t cx = cell % (nx_ - 1);
    const std::size_t cy = cell / (nx_ - 1);
    const std::size_t p = node(cx, cy);
    return {p, p + 1, p + nx_, p + nx_ + 1};
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t nx_;
  std::size_t ny_;
};

/// Throws TooSmall unless width >= 2 and height >= 2.
Grid build_grid(std::size_t width, std::size_t height);

/// Values at the four 2x2 Gauss points of every cell, cell-major, points
/// ordered (xi-,eta-), (xi+,eta-), (xi-,eta+), (xi+,eta+).
struct QuadratureField {
  std::vector<double> values;

  double& at(std::size_t cell, std::size_t point) { return values[4 * cell + point]; }
  double at(std::size_t cell, std::size_t point) const { return values[4 * cell + point]; }
};

/// Gauss point coordinates on the unit reference cell.
inline constexpr double kGaussLo = 0.21132486540518711775;  // (1 - 1/sqrt(3)) / 2
inline constexpr double kGaussHi = 0.78867513459481288225;  // (1 + 1/sqrt(3)) / 2
inline constexpr std::array<std::array<double, 2>, 4> kGaussPoints = {
    {{kGaussLo, kGaussLo}, {kGaussHi, kGaussLo}, {kGaussLo, kGaussHi}, {kGaussHi, kGaussHi}}};

/// Trapezoidal nodal weights: 1 interior, 1/2 edge, 1/4 corner.
std::vector<double> lumped_mass(const Grid& grid);

/// Exact element stiffness of the bilinear basis on the unit square.
std::array<std::array<double, 4>, 4> q1_local_stiffness();

/// Bilinear interpolation of a nodal field at every Gauss point.
QuadratureField interpolate_to_quadrature(const Grid& grid, std::span<const double> field);

/// |grad u| of the Q1 interpolant at every Gauss point.
QuadratureField gradient_magnitude_at_quadrature(const Grid& grid, std::span<const double> field);

}  // namespace crossdiff
