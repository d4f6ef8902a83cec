#include "crossdiff/assembly.hpp"

#include <cmath>
#include <string>

#include "crossdiff/error.hpp"
#include "crossdiff/model.hpp"

namespace crossdiff {

namespace {

using LocalMatrix = std::array<std::array<double, 4>, 4>;

// grad(phi_a) . grad(phi_b) at each Gauss point of the unit cell.
std::array<LocalMatrix, 4> gauss_point_products() {
  std::array<LocalMatrix, 4> out{};
  for (std::size_t q = 0; q < 4; ++q) {
    const double xi = kGaussPoints[q][0];
    const double eta = kGaussPoints[q][1];
    const std::array<std::array<double, 2>, 4> grad = {
        {{-(1 - eta), -(1 - xi)}, {(1 - eta), -xi}, {-eta, (1 - xi)}, {eta, xi}}};
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) out[q][a][b] = grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1];
  }
  return out;
}

SparseMatrix stencil_pattern(const Grid& grid) {
  const std::size_t nx = grid.nx(), ny = grid.ny();
  std::vector<std::size_t> row_ptr(grid.node_count() + 1, 0);
  std::vector<std::size_t> cols;
  cols.reserve(9 * grid.node_count());
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      const std::size_t y0 = y > 0 ? y - 1 : 0, y1 = std::min(y + 1, ny - 1);
      const std::size_t x0 = x > 0 ? x - 1 : 0, x1 = std::min(x + 1, nx - 1);
      for (std::size_t yy = y0; yy <= y1; ++yy)
        for (std::size_t xx = x0; xx <= x1; ++xx) cols.push_back(grid.node(xx, yy));
      row_ptr[grid.node(x, y) + 1] = cols.size();
    }
  }
  std::vector<double> values(cols.size(), 0.0);
  return SparseMatrix(grid.node_count(), grid.node_count(), std::move(row_ptr), std::move(cols),
                      std::move(values));
}

std::size_t locate(const SparseMatrix& m, std::size_t row, std::size_t col) {
  for (std::size_t k = m.row_ptr()[row]; k < m.row_ptr()[row + 1]; ++k)
    if (m.col_idx()[k] == col) return k;
  throw Error(ErrorCode::BadDimensions, "entry outside stencil pattern");
}

SparseMatrix block_pattern(const SparseMatrix& k, const std::array<bool, 2>& off_diag) {
  const std::size_t n = k.rows();
  const auto kp = k.row_ptr();
  const auto kc = k.col_idx();
  std::vector<std::size_t> row_ptr(2 * n + 1, 0);
  std::vector<std::size_t> cols;
  cols.reserve(4 * k.nonzeros());
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t j = 0; j < 2; ++j) {
        if (i != j && !off_diag[i]) continue;
        for (std::size_t e = kp[r]; e < kp[r + 1]; ++e) cols.push_back(j * n + kc[e]);
      }
      row_ptr[i * n + r + 1] = cols.size();
    }
  }
  std::vector<double> values(cols.size(), 0.0);
  return SparseMatrix(2 * n, 2 * n, std::move(row_ptr), std::move(cols), std::move(values));
}

}  // namespace

SystemAssembler::SystemAssembler(const Grid& grid)
    : grid_(grid), stiffness_(stencil_pattern(grid)), cell_offsets_(grid.cell_count()),
      diag_offsets_(grid.node_count()) {
  for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
    const auto nodes = grid_.cell_nodes(c);
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) cell_offsets_[c][4 * a + b] = locate(stiffness_, nodes[a], nodes[b]);
  }
  for (std::size_t p = 0; p < grid_.node_count(); ++p) diag_offsets_[p] = locate(stiffness_, p, p);
}

const SparseMatrix& SystemAssembler::stiffness(const QuadratureField& g) {
  if (g.values.size() != 4 * grid_.cell_count()) {
    throw Error(ErrorCode::BadDimensions, "quadrature field has " + std::to_string(g.values.size()) +
                                              " values, expected " + std::to_string(4 * grid_.cell_count()));
  }
  for (double v : g.values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::NonPositiveDetector, "detector value " + std::to_string(v) + " at a quadrature point");
    }
  }

  static const std::array<LocalMatrix, 4> products = gauss_point_products();
  constexpr double weight = 0.25;  // unit cell area / 4 Gauss points
  auto values = stiffness_.values();
  std::fill(values.begin(), values.end(), 0.0);
  for (std::size_t c = 0; c < grid_.cell_count(); ++c) {
    const auto& offsets = cell_offsets_[c];
    const double w0 = weight * g.at(c, 0), w1 = weight * g.at(c, 1);
    const double w2 = weight * g.at(c, 2), w3 = weight * g.at(c, 3);
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        values[offsets[4 * a + b]] += w0 * products[0][a][b] + w1 * products[1][a][b] + w2 * products[2][a][b] +
                                      w3 * products[3][a][b];
      }
    }
  }
  return stiffness_;
}

const SparseMatrix& SystemAssembler::coupled(const DiffusionMatrix& a, std::span<const double> mass,
                                             const std::array<double, 2>& diag_coef) {
  const std::size_t n = stiffness_.rows();
  if (mass.size() != n) throw Error(ErrorCode::BadDimensions, "stiffness and mass sizes disagree");
  const std::array<bool, 2> off_diag = {a.a12 != 0.0, a.a21 != 0.0};
  if (coupled_.rows() != 2 * n || off_diag != coupled_off_diag_) {
    coupled_ = block_pattern(stiffness_, off_diag);
    coupled_off_diag_ = off_diag;
  }
  const auto kp = stiffness_.row_ptr();
  const auto kv = stiffness_.values();
  auto out = coupled_.values();
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) {
    for (std::size_t r = 0; r < n; ++r) {
      for (int j = 0; j < 2; ++j) {
        if (i != j && !off_diag[static_cast<std::size_t>(i)]) continue;
        const double aij = a(i, j);
        const std::size_t diag = diag_offsets_[r];
        for (std::size_t e = kp[r]; e < kp[r + 1]; ++e) {
          double v = aij * kv[e];
          if (i == j && e == diag) v += diag_coef[static_cast<std::size_t>(i)] * mass[r];
          out[pos++] = v;
        }
      }
    }
  }
  return coupled_;
}

const SparseMatrix& SystemAssembler::scalar(std::span<const double> mass, double diag_coef) {
  const std::size_t n = stiffness_.rows();
  if (mass.size() != n) throw Error(ErrorCode::BadDimensions, "stiffness and mass sizes disagree");
  if (scalar_.rows() != n) scalar_ = stiffness_;
  auto out = scalar_.values();
  const auto kv = stiffness_.values();
  std::copy(kv.begin(), kv.end(), out.begin());
  // 1.0 * K matches the diagonal block of coupled() for a_11 = 1 bit for bit.
  for (std::size_t r = 0; r < n; ++r) out[diag_offsets_[r]] = 1.0 * kv[diag_offsets_[r]] + diag_coef * mass[r];
  return scalar_;
}

SparseMatrix assemble_stiffness(const Grid& grid, const QuadratureField& g) {
  SystemAssembler assembler(grid);
  return assembler.stiffness(g);
}

SparseMatrix assemble_block_system(const SparseMatrix& stiffness, const DiffusionMatrix& a,
                                   std::span<const double> mass, const std::array<double, 2>& diag_coef) {
  const std::size_t n = stiffness.rows();
  if (stiffness.cols() != n || mass.size() != n) {
    throw Error(ErrorCode::BadDimensions, "stiffness and mass sizes disagree");
  }
  const std::array<bool, 2> off_diag = {a.a12 != 0.0, a.a21 != 0.0};
  SparseMatrix out = block_pattern(stiffness, off_diag);
  const auto kp = stiffness.row_ptr();
  const auto kc = stiffness.col_idx();
  const auto kv = stiffness.values();
  auto vals = out.values();
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) {
    for (std::size_t r = 0; r < n; ++r) {
      for (int j = 0; j < 2; ++j) {
        if (i != j && !off_diag[static_cast<std::size_t>(i)]) continue;
        const double aij = a(i, j);
        for (std::size_t e = kp[r]; e < kp[r + 1]; ++e) {
          double v = aij * kv[e];
          if (i == j && kc[e] == r) v += diag_coef[static_cast<std::size_t>(i)] * mass[r];
          vals[pos++] = v;
        }
      }
    }
  }
  return out;
}

SparseMatrix assemble_coupled(const Grid& grid, const QuadratureField& g, const DiffusionMatrix& a,
                              std::span<const double> mass, double tau, const std::array<double, 2>& beta) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (!(beta[0] >= 0.0) || !(beta[1] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be >= 0");
  for (double v : {a.a11, a.a12, a.a21, a.a22}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "diffusion matrix must be finite");
  }
  if (mass.size() != grid.node_count()) throw Error(ErrorCode::BadDimensions, "mass size does not match grid");
  SystemAssembler assembler(grid);
  assembler.stiffness(g);
  return assembler.coupled(a, mass, {1.0 / tau + beta[0], 1.0 / tau + beta[1]});
}

SparseMatrix assemble_scalar(const SparseMatrix& stiffness, std::span<const double> mass, double diag_coef) {
  const std::size_t n = stiffness.rows();
  if (stiffness.cols() != n || mass.size() != n) throw Error(ErrorCode::BadDimensions, "stiffness and mass sizes disagree");
  SparseMatrix out = stiffness;
  auto vals = out.values();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = stiffness.row_ptr()[r]; k < stiffness.row_ptr()[r + 1]; ++k) {
      if (stiffness.col_idx()[k] == r) vals[k] = 1.0 * vals[k] + diag_coef * mass[r];
    }
  }
  return out;
}

}  // namespace crossdiff
