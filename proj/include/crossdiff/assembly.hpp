#pragma once

#include <array>
#include <span>
#include <vector>

#include "crossdiff/grid.hpp"
#include "crossdiff/sparse.hpp"

namespace crossdiff {

struct DiffusionMatrix;

/// Reusable assembler for one grid. The nine-point CSR pattern and the
/// position of every element-matrix entry inside it are computed once;
/// each assembly only rewrites values.
class SystemAssembler {
 public:
  explicit SystemAssembler(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }

  /// K_g[p,q] = sum over cells and Gauss points of w * g * grad(phi_p) . grad(phi_q).
  /// Throws NonPositiveDetector if any quadrature value is not strictly
  /// positive.
  const SparseMatrix& stiffness(const QuadratureField& g);

  /// Block system over (u1, u2) with component-major unknowns, built from
  /// the last stiffness():
  ///   block(i,j) = diag_coef[i] * diag(mass) * delta_ij + a_ij * K_g.
  /// Off-diagonal blocks with a_ij == 0 are structurally empty.
  const SparseMatrix& coupled(const DiffusionMatrix& a, std::span<const double> mass,
                              const std::array<double, 2>& diag_coef);

  /// diag_coef * diag(mass) + K_g from the last stiffness().
  const SparseMatrix& scalar(std::span<const double> mass, double diag_coef);

 private:
  Grid grid_;
  SparseMatrix stiffness_;
  std::vector<std::array<std::size_t, 16>> cell_offsets_;
  std::vector<std::size_t> diag_offsets_;
  SparseMatrix coupled_;
  std::array<bool, 2> coupled_off_diag_{false, false};
  SparseMatrix scalar_;
};

/// One-shot forms of the assembler.
SparseMatrix assemble_stiffness(const Grid& grid, const QuadratureField& g);

SparseMatrix assemble_block_system(const SparseMatrix& stiffness, const DiffusionMatrix& a,
                                   std::span<const double> mass, const std::array<double, 2>& diag_coef);

/// Semi-implicit time-step matrix: diag_coef[i] = 1/tau + beta[i].
SparseMatrix assemble_coupled(const Grid& grid, const QuadratureField& g, const DiffusionMatrix& a,
                              std::span<const double> mass, double tau, const std::array<double, 2>& beta);

SparseMatrix assemble_scalar(const SparseMatrix& stiffness, std::span<const double> mass, double diag_coef);

}  // namespace crossdiff
