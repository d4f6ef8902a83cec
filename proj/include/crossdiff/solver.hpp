#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crossdiff/sparse.hpp"

namespace crossdiff {

enum class SolverMethod { DirectDense, BiCGStab };

struct SolverConfig {
  SolverMethod method = SolverMethod::BiCGStab;
  double rel_tol = 1e-10;
  /// 0 selects 10 * rows.
  std::size_t max_iter = 0;
  /// Systems up to this many unknowns are retried with the dense LU when the
  /// Krylov iteration breaks down or hits max_iter.
  std::size_t dense_fallback_limit = 4096;
};

struct SolveStats {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool used_dense = false;
};

/// Solves M x = rhs. On return ||M x - rhs|| <= rel_tol * ||rhs||; otherwise
/// throws SolverDiverged (iterative) or SingularMatrix (direct).
/// `initial_guess`, when non-empty, seeds the Krylov iteration.
std::vector<double> solve_linear(const SparseMatrix& m, std::span<const double> rhs, const SolverConfig& cfg,
                                 std::span<const double> initial_guess = {}, SolveStats* stats = nullptr);

/// In-place dense LU with partial pivoting, row-major n x n. Used for the
/// direct path; exposed for callers that already hold a dense matrix.
class DenseLu {
 public:
  DenseLu(std::vector<double> a, std::size_t n);
  std::vector<double> solve(std::span<const double> b) const;

 private:
  std::size_t n_;
  std::vector<double> lu_;
  std::vector<std::size_t> perm_;
};

}  // namespace crossdiff
