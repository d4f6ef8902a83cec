#include "crossdiff/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crossdiff/error.hpp"

namespace crossdiff {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double residual_norm(const SparseMatrix& m, std::span<const double> x, std::span<const double> rhs,
                     std::vector<double>& r) {
  m.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
  return norm2(r);
}

// Jacobi-preconditioned BiCGStab. Returns false on breakdown or when the
// iteration cap is reached; x holds the last iterate either way.
bool bicgstab(const SparseMatrix& m, std::span<const double> rhs, std::vector<double>& x, double tol,
              std::size_t max_iter, std::size_t& iterations, double& final_rnorm) {
  const std::size_t n = rhs.size();
  std::vector<double> inv_diag = m.diagonal();
  for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;

  std::vector<double> r(n), r_hat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), p_hat(n), s_hat(n);
  const double target = tol * norm2(rhs);
  double rnorm = residual_norm(m, x, rhs, r);
  final_rnorm = rnorm;
  iterations = 0;
  if (rnorm <= target) return true;
  r_hat = r;

  double rho = 1.0, alpha = 1.0, omega = 1.0;
  while (iterations < max_iter) {
    ++iterations;
    const double rho_next = dot(r_hat, r);
    if (rho_next == 0.0 || !std::isfinite(rho_next)) return false;
    const double beta = (rho_next / rho) * (alpha / omega);
    rho = rho_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::size_t i = 0; i < n; ++i) p_hat[i] = inv_diag[i] * p[i];
    m.multiply(p_hat, v);
    const double denom = dot(r_hat, v);
    if (denom == 0.0 || !std::isfinite(denom)) return false;
    alpha = rho / denom;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm2(s) <= target) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p_hat[i];
      break;
    }
    for (std::size_t i = 0; i < n; ++i) s_hat[i] = inv_diag[i] * s[i];
    m.multiply(s_hat, t);
    const double tt = dot(t, t);
    if (tt == 0.0) return false;
    omega = dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p_hat[i] + omega * s_hat[i];
    for (std::size_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    if (norm2(r) <= target) break;
    if (omega == 0.0) return false;
  }
  // Recurrence residuals drift; the contract is on the true residual.
  final_rnorm = residual_norm(m, x, rhs, r);
  return final_rnorm <= target;
}

std::vector<double> solve_dense(const SparseMatrix& m, std::span<const double> rhs, double tol,
                                SolveStats& stats) {
  DenseLu lu(m.to_dense(), m.rows());
  std::vector<double> x = lu.solve(rhs);
  std::vector<double> r(rhs.size());
  const double target = tol * norm2(rhs);
  double rnorm = residual_norm(m, x, rhs, r);
  // A few steps of iterative refinement recover accuracy lost to pivot growth.
  for (int step = 0; step < 3 && rnorm > target; ++step) {
    const auto dx = lu.solve(r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
    rnorm = residual_norm(m, x, rhs, r);
  }
  const double bnorm = norm2(rhs);
  stats.relative_residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
  stats.used_dense = true;
  if (rnorm > target) {
    throw Error(ErrorCode::SingularMatrix,
                "dense LU residual " + std::to_string(stats.relative_residual) + " exceeds tolerance");
  }
  return x;
}

}  // namespace

DenseLu::DenseLu(std::vector<double> a, std::size_t n) : n_(n), lu_(std::move(a)), perm_(n) {
  if (lu_.size() != n * n) throw Error(ErrorCode::BadDimensions, "dense LU needs an n x n matrix");
  double scale = 0.0;
  for (double v : lu_) scale = std::max(scale, std::abs(v));
  const double tiny = scale * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  if (scale == 0.0) throw Error(ErrorCode::SingularMatrix, "zero matrix");
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = std::abs(lu_[k * n + k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu_[i * n + k]);
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (best <= tiny) throw Error(ErrorCode::SingularMatrix, "zero pivot in column " + std::to_string(k));
    if (pivot != k) {
      std::swap_ranges(lu_.begin() + static_cast<std::ptrdiff_t>(k * n),
                       lu_.begin() + static_cast<std::ptrdiff_t>((k + 1) * n),
                       lu_.begin() + static_cast<std::ptrdiff_t>(pivot * n));
      std::swap(perm_[k], perm_[pivot]);
    }
    const double inv = 1.0 / lu_[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      double& lik = lu_[i * n + k];
      if (lik == 0.0) continue;
      lik *= inv;
      const double* row_k = &lu_[k * n];
      double* row_i = &lu_[i * n];
      for (std::size_t j = k + 1; j < n; ++j) row_i[j] -= lik * row_k[j];
    }
  }
}

std::vector<double> DenseLu::solve(std::span<const double> b) const {
  if (b.size() != n_) throw Error(ErrorCode::BadDimensions, "rhs size mismatch");
  std::vector<double> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = x[i];
    for (std::size_t j = 0; j < i; ++j) acc -= lu_[i * n_ + j] * x[j];
    x[i] = acc;
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    double acc = x[ii];
    for (std::size_t j = ii + 1; j < n_; ++j) acc -= lu_[ii * n_ + j] * x[j];
    x[ii] = acc / lu_[ii * n_ + ii];
  }
  return x;
}

std::vector<double> solve_linear(const SparseMatrix& m, std::span<const double> rhs, const SolverConfig& cfg,
                                 std::span<const double> initial_guess, SolveStats* stats) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::BadDimensions, "matrix must be square");
  if (rhs.size() != m.rows()) throw Error(ErrorCode::BadDimensions, "rhs size does not match matrix");
  if (!initial_guess.empty() && initial_guess.size() != rhs.size()) {
    throw Error(ErrorCode::BadDimensions, "initial guess size does not match matrix");
  }
  if (!(cfg.rel_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "rel_tol must be positive");

  SolveStats local;
  SolveStats& st = stats ? *stats : local;
  st = {};

  if (cfg.method == SolverMethod::DirectDense) return solve_dense(m, rhs, cfg.rel_tol, st);

  std::vector<double> x(rhs.size(), 0.0);
  if (norm2(rhs) == 0.0) return x;
  if (!initial_guess.empty()) std::copy(initial_guess.begin(), initial_guess.end(), x.begin());
  const std::size_t max_iter = cfg.max_iter > 0 ? cfg.max_iter : 10 * m.rows();
  double rnorm = 0.0;
  const bool ok = bicgstab(m, rhs, x, cfg.rel_tol, max_iter, st.iterations, rnorm);
  if (ok) {
    st.relative_residual = rnorm / norm2(rhs);
    return x;
  }
  if (m.rows() <= cfg.dense_fallback_limit) {
    const std::size_t iters = st.iterations;
    auto dense = solve_dense(m, rhs, cfg.rel_tol, st);
    st.iterations = iters;
    return dense;
  }
  throw Error(ErrorCode::SolverDiverged,
              "BiCGStab did not reach rel_tol " + std::to_string(cfg.rel_tol) + " in " +
                  std::to_string(st.iterations) + " iterations");
}

}  // namespace crossdiff
