#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "crossdiff/assembly.hpp"
#include "crossdiff/grid.hpp"
#include "crossdiff/image.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

/// What to do when the fixed-point loop reaches max_fp_iter without meeting
/// the tolerance: keep the last iterate and flag it, or throw
/// FixedPointStalled.
enum class StallPolicy { Accept, Abort };

struct CdConfig {
  double tau = 0.01;
  double t_final = 0.2;
  double fp_tol = 1e-3;
  std::size_t max_fp_iter = 50;
  double theta = std::numbers::pi / 30.0;
  /// Overrides the rotation(theta) matrix when set.
  std::optional<DiffusionMatrix> diffusion;
  EdgeDetector detector = EdgeDetector::exponential(0.15);
  std::array<double, 2> beta = {0.0, 0.0};
  SolverConfig solver;
  StallPolicy on_stall = StallPolicy::Accept;

  DiffusionMatrix matrix() const { return diffusion ? *diffusion : DiffusionMatrix::rotation(theta); }
};

struct CdState {
  std::vector<double> u1;
  std::vector<double> u2;
  std::size_t step_index = 0;
  std::size_t fp_iterations_last = 0;
};

/// One line of the per-step diagnostics stream.
struct StepDiagnostics {
  std::size_t step = 0;
  std::size_t fp_iters = 0;
  /// max_i ||u_i^{n,k} - u_i^{n,k-1}||_2 at the accepted iterate.
  double fp_residual = 0.0;
  /// max_i |mass(u_i^{n+1}) - mass(u_i^n)| / sum_p m_p (|u1^n| + |u2^n|).
  double mass_drift = 0.0;
  /// sum_p m_p (u1^2 + u2^2) after the step.
  double energy = 0.0;
  bool stalled = false;
};

/// Number of time steps covering [0, t_final]; t_final/tau is rounded when it
/// is an integer up to floating noise, otherwise ceiled.
std::size_t step_count(double t_final, double tau);

/// Semi-implicit time stepper with a lagged-detector fixed-point loop:
/// for k = 1, 2, ... assemble with g(u2^{n,k-1}) at the Gauss points and solve
///   (1/tau + beta_i) M u_i^{n,k} + sum_j a_ij K_g u_j^{n,k}
///       = (1/tau) M u_i^n + beta_i M u_i0
/// until max_i ||u_i^{n,k} - u_i^{n,k-1}||_2 < fp_tol.
/// Holds assembly scratch space, so one stepper serves one thread.
class QssStepper {
 public:
  QssStepper(Grid grid, CdConfig cfg);

  const Grid& grid() const noexcept { return grid_; }
  const CdConfig& config() const noexcept { return cfg_; }
  std::span<const double> mass() const noexcept { return mass_; }

  CdState step(const CdState& state, std::span<const double> u10, std::span<const double> u20,
               StepDiagnostics* diag = nullptr);

 private:
  Grid grid_;
  CdConfig cfg_;
  DiffusionMatrix a_;
  std::vector<double> mass_;
  SystemAssembler assembler_;
};

CdState qss_step(const CdState& state, std::span<const double> u10, std::span<const double> u20,
                 const CdConfig& cfg, const Grid& grid, StepDiagnostics* diag = nullptr);

struct CdResult {
  Image denoised;
  /// Raw auxiliary component.
  Image u2;
  std::vector<StepDiagnostics> steps;
};

/// Runs step_count(t_final, tau) QSS steps from (noisy, 0).
CdResult denoise_cd(const Image& noisy, const CdConfig& cfg);

/// Affine rescale to [0, 255] for display; a constant field maps to 0.
Image rescale_for_display(const Image& field);

/// gamma_i u_i - div(g(u2) sum_j a_ij grad u_j) = G_i with natural boundary
/// conditions.
struct SteadyProblem {
  std::array<double, 2> gamma = {1.0, 1.0};
  std::vector<double> g1;
  std::vector<double> g2;
};

struct SteadyOptions {
  double fp_tol = 1e-3;
  std::size_t max_fp_iter = 50;
  /// History length of the Anderson mixing applied to the lagged map;
  /// 0 gives plain Picard iteration.
  std::size_t anderson_depth = 5;
  /// When the lagged iteration stalls, up to this many pseudo-transient
  /// Newton steps on the full nonlinear system follow; 0 disables them.
  std::size_t continuation_max_iter = 200;
  SolverConfig solver;
  StallPolicy on_stall = StallPolicy::Abort;
};

struct SteadyResult {
  CdState state;
  std::size_t fp_iterations = 0;
  double fp_residual = 0.0;
  bool converged = false;
  /// gamma1 (1-|alpha21|) |u1|_inf + gamma2 (1-|alpha12|) |u2|_inf
  double linf_lhs = 0.0;
  /// (1+|alpha21|) |G1|_inf + (1+|alpha12|) |G2|_inf
  double linf_rhs = 0.0;
  bool linf_bound_holds = false;
};

/// Fixed-point solve of the steady system starting from G_i / gamma_i.
/// The L-infinity a priori bound is evaluated on the result and reported,
/// not enforced.
SteadyResult solve_steady(const SteadyProblem& prob, const DiffusionMatrix& a, const EdgeDetector& detector,
                          const Grid& grid, const SteadyOptions& opts = {});

/// Mass-lumped discrete Laplacian L_h u = -diag(m)^-1 K u with g = 1.
std::vector<double> lumped_laplacian(const Grid& grid, std::span<const double> u);

/// One QSS step from (u10, 0) with g = 1, returning
///   ||u2^1 / tau - sin(theta) L_h u10||_2 / ||L_h u10||_2
/// (0 when L_h u10 vanishes).
double small_time_consistency(std::span<const double> u10, double theta, double tau, const Grid& grid);

}  // namespace crossdiff
