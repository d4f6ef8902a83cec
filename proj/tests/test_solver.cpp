#include <doctest.h>

#include <Eigen/Dense>

#include "crossdiff/assembly.hpp"
#include "crossdiff/grid.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/solver.hpp"
#include "support.hpp"

using namespace crossdiff;
using testing::error_of;

namespace {

std::vector<double> eigen_solve(const SparseMatrix& m, const std::vector<double>& rhs) {
  const auto n = static_cast<Eigen::Index>(m.rows());
  const auto dense = m.to_dense();
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = dense[static_cast<std::size_t>(i * n + j)];
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), n);
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  return {x.data(), x.data() + n};
}

double residual(const SparseMatrix& m, const std::vector<double>& x, const std::vector<double>& rhs) {
  auto r = m * x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= rhs[i];
  return testing::norm2(r) / testing::norm2(rhs);
}

// Time-step matrix of the coupled scheme on a 6x6 grid: 72 unknowns,
// nonsymmetric off-diagonal blocks.
SparseMatrix coupled_72(std::uint64_t seed) {
  const Grid grid = build_grid(6, 6);
  const QuadratureField g{testing::random_vector(4 * grid.cell_count(), seed, 0.01, 1.0)};
  return assemble_coupled(grid, g, DiffusionMatrix::rotation(std::numbers::pi / 30), lumped_mass(grid), 0.5,
                          {0.0, 0.0});
}

}  // namespace

TEST_CASE("identity system") {
  const auto rhs = testing::random_vector(10, 1);
  for (auto method : {SolverMethod::BiCGStab, SolverMethod::DirectDense}) {
    SolverConfig cfg;
    cfg.method = method;
    const auto x = solve_linear(SparseMatrix::identity(10), rhs, cfg);
    CHECK(testing::max_abs_diff(x, rhs) <= 1e-15);
  }
}

TEST_CASE("72-unknown coupled system matches the dense oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = coupled_72(seed);
    REQUIRE(m.rows() == 72);
    const auto rhs = testing::random_vector(72, 50 + seed, -100, 100);
    const auto oracle = eigen_solve(m, rhs);
    for (auto method : {SolverMethod::BiCGStab, SolverMethod::DirectDense}) {
      SolverConfig cfg;
      cfg.method = method;
      SolveStats stats;
      const auto x = solve_linear(m, rhs, cfg, {}, &stats);
      CHECK(testing::rel_diff(x, oracle) <= 1e-8);
      CHECK(residual(m, x, rhs) <= cfg.rel_tol);
      CHECK(stats.relative_residual <= cfg.rel_tol);
    }
  }
}

TEST_CASE("random nonsymmetric diagonally dominant systems") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 40;
    const auto vals = testing::random_vector(n * n, seed);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && vals[i * n + j] > 0.5) t.push_back({i, j, vals[i * n + j]});
        if (i == j) t.push_back({i, i, 30.0 + vals[i * n + i]});
      }
    const auto m = SparseMatrix::from_triplets(n, n, t);
    const auto rhs = testing::random_vector(n, 900 + seed);
    const auto oracle = eigen_solve(m, rhs);
    for (auto method : {SolverMethod::BiCGStab, SolverMethod::DirectDense}) {
      SolverConfig cfg;
      cfg.method = method;
      const auto x = solve_linear(m, rhs, cfg);
      CHECK(testing::rel_diff(x, oracle) <= 1e-8);
      CHECK(residual(m, x, rhs) <= 1e-10);
    }
  }
}

TEST_CASE("warm start and zero right-hand side") {
  const auto m = coupled_72(7);
  const auto rhs = testing::random_vector(72, 3);
  const auto x = solve_linear(m, rhs, {});
  SolveStats stats;
  const auto again = solve_linear(m, rhs, {}, x, &stats);
  CHECK(stats.iterations == 0);
  CHECK(residual(m, again, rhs) <= 1e-10);
  CHECK(solve_linear(m, std::vector<double>(72, 0.0), {}) == std::vector<double>(72, 0.0));
}

TEST_CASE("failures") {
  SUBCASE("zero matrix is singular") {
    const SparseMatrix zero(4, 4, {0, 0, 0, 0, 0}, {}, {});
    SolverConfig cfg;
    cfg.method = SolverMethod::DirectDense;
    CHECK(error_of([&] { solve_linear(zero, std::vector<double>(4, 1.0), cfg); }) == ErrorCode::SingularMatrix);
    CHECK(error_of([&] { solve_linear(zero, std::vector<double>(4, 1.0), {}); }) == ErrorCode::SingularMatrix);
  }
  SUBCASE("rank-deficient matrix is singular") {
    const auto m = SparseMatrix::from_triplets(3, 3, {{0, 0, 1}, {0, 1, 2}, {1, 0, 2}, {1, 1, 4}, {2, 2, 1}});
    SolverConfig cfg;
    cfg.method = SolverMethod::DirectDense;
    CHECK(error_of([&] { solve_linear(m, std::vector<double>{1, 0, 1}, cfg); }) == ErrorCode::SingularMatrix);
  }
  SUBCASE("iteration cap without fallback") {
    SolverConfig cfg;
    cfg.max_iter = 1;
    cfg.dense_fallback_limit = 0;
    cfg.rel_tol = 1e-14;
    const auto m = coupled_72(2);
    CHECK(error_of([&] { solve_linear(m, testing::random_vector(72, 8), cfg); }) == ErrorCode::SolverDiverged);
  }
  SUBCASE("iteration cap with fallback recovers") {
    SolverConfig cfg;
    cfg.max_iter = 1;
    const auto m = coupled_72(2);
    const auto rhs = testing::random_vector(72, 8);
    SolveStats stats;
    const auto x = solve_linear(m, rhs, cfg, {}, &stats);
    CHECK(stats.used_dense);
    CHECK(residual(m, x, rhs) <= 1e-10);
  }
  SUBCASE("dimension checks") {
    CHECK(error_of([] { solve_linear(SparseMatrix::identity(3), std::vector<double>(4), {}); }) ==
          ErrorCode::BadDimensions);
    SolverConfig cfg;
    cfg.rel_tol = 0.0;
    CHECK(error_of([&] { solve_linear(SparseMatrix::identity(3), std::vector<double>(3), cfg); }) ==
          ErrorCode::InvalidArgument);
  }
}

TEST_CASE("dense LU") {
  const std::vector<double> a{0, 2, 1, 1, 1, 0, 3, 0, 1};
  const DenseLu lu(a, 3);
  const auto x = lu.solve(std::vector<double>{5, 3, 4});
  // Oracle: x = (1, 2, 1) by substitution.
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(x[2] == doctest::Approx(1.0).epsilon(1e-14));
}
