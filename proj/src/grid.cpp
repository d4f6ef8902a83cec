#include "crossdiff/grid.hpp"

#include <cmath>
#include <string>

#include "crossdiff/error.hpp"

namespace crossdiff {

Grid::Grid(std::size_t nx, std::size_t ny) : nx_(nx), ny_(ny) {
  if (nx < 2 || ny < 2) {
    throw Error(ErrorCode::TooSmall,
                "grid needs at least 2x2 nodes, got " + std::to_string(nx) + "x" + std::to_string(ny));
  }
}

Grid build_grid(std::size_t width, std::size_t height) { return Grid(width, height); }

std::vector<double> lumped_mass(const Grid& grid) {
  std::vector<double> mass(grid.node_count(), 0.0);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    for (std::size_t p : grid.cell_nodes(c)) mass[p] += 0.25;
  }
  return mass;
}

std::array<std::array<double, 4>, 4> q1_local_stiffness() {
  constexpr double d = 2.0 / 3.0;
  constexpr double e = -1.0 / 6.0;
  constexpr double g = -1.0 / 3.0;
  // Local nodes 0-1, 0-2, 1-3, 2-3 share an edge; 0-3 and 1-2 are diagonal.
  return {{{d, e, e, g}, {e, d, g, e}, {e, g, d, e}, {g, e, e, d}}};
}

namespace {

void check_length(const Grid& grid, std::span<const double> field) {
  if (field.size() != grid.node_count()) {
    throw Error(ErrorCode::BadDimensions, "nodal field has " + std::to_string(field.size()) +
                                              " entries, grid has " + std::to_string(grid.node_count()));
  }
}

}  // namespace

QuadratureField interpolate_to_quadrature(const Grid& grid, std::span<const double> field) {
  check_length(grid, field);
  QuadratureField out{std::vector<double>(4 * grid.cell_count())};
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto n = grid.cell_nodes(c);
    const double u0 = field[n[0]], u1 = field[n[1]], u2 = field[n[2]], u3 = field[n[3]];
    for (std::size_t q = 0; q < 4; ++q) {
      const double xi = kGaussPoints[q][0];
      const double eta = kGaussPoints[q][1];
      out.at(c, q) = (1 - xi) * (1 - eta) * u0 + xi * (1 - eta) * u1 + (1 - xi) * eta * u2 + xi * eta * u3;
    }
  }
  return out;
}

QuadratureField gradient_magnitude_at_quadrature(const Grid& grid, std::span<const double> field) {
  check_length(grid, field);
  QuadratureField out{std::vector<double>(4 * grid.cell_count())};
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto n = grid.cell_nodes(c);
    const double u0 = field[n[0]], u1 = field[n[1]], u2 = field[n[2]], u3 = field[n[3]];
    for (std::size_t q = 0; q < 4; ++q) {
      const double xi = kGaussPoints[q][0];
      const double eta = kGaussPoints[q][1];
      const double dx = (1 - eta) * (u1 - u0) + eta * (u3 - u2);
      const double dy = (1 - xi) * (u2 - u0) + xi * (u3 - u1);
      out.at(c, q) = std::hypot(dx, dy);
    }
  }
  return out;
}

}  // namespace crossdiff
