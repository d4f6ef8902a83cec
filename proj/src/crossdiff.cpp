#include "crossdiff/crossdiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "crossdiff/assembly.hpp"
#include "crossdiff/error.hpp"

namespace crossdiff {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Anderson mixing for x = S(x): keeps the last `depth` differences of
// f = S(x) - x and S(x), and returns S(x) minus the combination of past
// steps that best cancels f in the least-squares sense. depth 0 is plain
// Picard iteration.
class AndersonMixer {
 public:
  explicit AndersonMixer(std::size_t depth) : depth_(depth) {}

  std::vector<double> update(const std::vector<double>& x, const std::vector<double>& sx) {
    const std::size_t len = x.size();
    std::vector<double> f(len);
    for (std::size_t i = 0; i < len; ++i) f[i] = sx[i] - x[i];
    if (depth_ == 0) return sx;
    if (!prev_f_.empty()) {
      std::vector<double> df(len), dg(len);
      for (std::size_t i = 0; i < len; ++i) {
        df[i] = f[i] - prev_f_[i];
        dg[i] = sx[i] - prev_g_[i];
      }
      d_f_.push_back(std::move(df));
      d_g_.push_back(std::move(dg));
      if (d_f_.size() > depth_) {
        d_f_.erase(d_f_.begin());
        d_g_.erase(d_g_.begin());
      }
    }
    prev_f_ = f;
    prev_g_ = sx;
    const std::size_t m = d_f_.size();
    if (m == 0) return sx;

    // Normal equations (dF^T dF + eps I) c = dF^T f, eps for rank loss.
    std::vector<double> gram(m * m), proj(m);
    double trace = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a; b < m; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < len; ++i) s += d_f_[a][i] * d_f_[b][i];
        gram[a * m + b] = gram[b * m + a] = s;
      }
      trace += gram[a * m + a];
      double s = 0.0;
      for (std::size_t i = 0; i < len; ++i) s += d_f_[a][i] * f[i];
      proj[a] = s;
    }
    for (std::size_t a = 0; a < m; ++a) gram[a * m + a] += 1e-10 * trace + std::numeric_limits<double>::min();
    std::vector<double> c;
    try {
      c = DenseLu(std::move(gram), m).solve(proj);
    } catch (const Error&) {
      d_f_.clear();
      d_g_.clear();
      return sx;
    }
    std::vector<double> out = sx;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t i = 0; i < len; ++i) out[i] -= c[a] * d_g_[a][i];
    return out;
  }

 private:
  std::size_t depth_;
  std::vector<double> prev_f_, prev_g_;
  std::vector<std::vector<double>> d_f_, d_g_;
};

double diff_norm(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double weighted_sum(std::span<const double> m, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += m[i] * u[i];
  return s;
}

QuadratureField detector_at_quadrature(const Grid& grid, const EdgeDetector& g, std::span<const double> u2) {
  QuadratureField q = interpolate_to_quadrature(grid, u2);
  for (double& v : q.values) v = g(v);
  return q;
}

// Derivative of the lagged operator u -> K_{g(u2)} (A u) with respect to u2,
// i.e. the part of the Newton Jacobian that the fixed-point map drops.
// Rows and columns use the component-major unknown layout.
SparseMatrix detector_sensitivity(const Grid& grid, const EdgeDetector& g, const DiffusionMatrix& a,
                                  std::span<const double> u) {
  const std::size_t n = grid.node_count();
  std::vector<Triplet> t;
  t.reserve(grid.cell_count() * 4 * 32);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const auto nodes = grid.cell_nodes(c);
    for (const auto& pt : kGaussPoints) {
      const double x = pt[0], y = pt[1];
      const std::array<double, 4> phi = {(1 - x) * (1 - y), x * (1 - y), (1 - x) * y, x * y};
      const std::array<std::array<double, 2>, 4> dphi = {
          {{-(1 - y), -(1 - x)}, {1 - y, -x}, {-y, 1 - x}, {y, x}}};
      double v = 0.0;
      std::array<std::array<double, 2>, 2> grad{};
      for (int l = 0; l < 4; ++l) {
        v += phi[l] * u[n + nodes[l]];
        for (int comp = 0; comp < 2; ++comp) {
          grad[comp][0] += dphi[l][0] * u[comp * n + nodes[l]];
          grad[comp][1] += dphi[l][1] * u[comp * n + nodes[l]];
        }
      }
      const double dg = 0.25 * g.derivative(v);
      if (dg == 0.0) continue;
      for (int i = 0; i < 2; ++i) {
        const double fx = a(i, 0) * grad[0][0] + a(i, 1) * grad[1][0];
        const double fy = a(i, 0) * grad[0][1] + a(i, 1) * grad[1][1];
        for (int p = 0; p < 4; ++p) {
          const double flux = dg * (dphi[p][0] * fx + dphi[p][1] * fy);
          for (int l = 0; l < 4; ++l) t.push_back({i * n + nodes[p], n + nodes[l], flux * phi[l]});
        }
      }
    }
  }
  return SparseMatrix::from_triplets(2 * n, 2 * n, std::move(t));
}

SparseMatrix add(const SparseMatrix& x, const SparseMatrix& y) {
  std::vector<Triplet> t;
  t.reserve(x.nonzeros() + y.nonzeros());
  for (const SparseMatrix* m : {&x, &y})
    for (std::size_t r = 0; r < m->rows(); ++r)
      for (std::size_t k = m->row_ptr()[r]; k < m->row_ptr()[r + 1]; ++k) t.push_back({r, m->col_idx()[k], m->values()[k]});
  return SparseMatrix::from_triplets(x.rows(), x.cols(), std::move(t));
}

void validate(const CdConfig& cfg) {
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (!(cfg.fp_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "fp_tol must be positive");
  if (cfg.max_fp_iter == 0) throw Error(ErrorCode::InvalidArgument, "max_fp_iter must be positive");
  if (!(cfg.beta[0] >= 0.0) || !(cfg.beta[1] >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "fidelity weights must be nonnegative");
  }
  cfg.detector.validate();
}

}  // namespace

std::size_t step_count(double t_final, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (!(t_final > 0.0)) return 0;
  const double ratio = t_final / tau;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(ratio));
}

QssStepper::QssStepper(Grid grid, CdConfig cfg)
    : grid_(std::move(grid)), cfg_(std::move(cfg)), a_(cfg_.matrix()), mass_(lumped_mass(grid_)),
      assembler_(grid_) {
  validate(cfg_);
  check_hypothesis(a_);
}

CdState QssStepper::step(const CdState& state, std::span<const double> u10, std::span<const double> u20,
                         StepDiagnostics* diag) {
  const std::size_t n = grid_.node_count();
  if (state.u1.size() != n || state.u2.size() != n) {
    throw Error(ErrorCode::BadDimensions, "state does not match grid");
  }
  const bool fidelity = cfg_.beta[0] > 0.0 || cfg_.beta[1] > 0.0;
  if (fidelity && (u10.size() != n || u20.size() != n)) {
    throw Error(ErrorCode::BadDimensions, "fidelity targets do not match grid");
  }

  const double inv_tau = 1.0 / cfg_.tau;
  std::vector<double> rhs(2 * n);
  for (std::size_t p = 0; p < n; ++p) {
    rhs[p] = inv_tau * mass_[p] * state.u1[p];
    rhs[n + p] = inv_tau * mass_[p] * state.u2[p];
    if (fidelity) {
      rhs[p] += cfg_.beta[0] * mass_[p] * u10[p];
      rhs[n + p] += cfg_.beta[1] * mass_[p] * u20[p];
    }
  }

  std::vector<double> iterate(2 * n);
  std::copy(state.u1.begin(), state.u1.end(), iterate.begin());
  std::copy(state.u2.begin(), state.u2.end(), iterate.begin() + static_cast<std::ptrdiff_t>(n));

  std::size_t k = 0;
  double residual = 0.0;
  bool converged = false;
  while (k < cfg_.max_fp_iter) {
    ++k;
    const std::span<const double> prev_u2(iterate.data() + n, n);
    const QuadratureField g = detector_at_quadrature(grid_, cfg_.detector, prev_u2);
    assembler_.stiffness(g);
    const SparseMatrix& system =
        assembler_.coupled(a_, mass_, {inv_tau + cfg_.beta[0], inv_tau + cfg_.beta[1]});
    std::vector<double> next = solve_linear(system, rhs, cfg_.solver, iterate);
    residual = std::max(diff_norm(std::span(next).first(n), std::span(iterate).first(n)),
                        diff_norm(std::span(next).subspan(n), std::span(iterate).subspan(n)));
    iterate = std::move(next);
    if (residual < cfg_.fp_tol) {
      converged = true;
      break;
    }
  }
  if (!converged && cfg_.on_stall == StallPolicy::Abort) {
    throw Error(ErrorCode::FixedPointStalled, "fixed point residual " + std::to_string(residual) + " after " +
                                                  std::to_string(k) + " iterations");
  }

  CdState out;
  out.u1.assign(iterate.begin(), iterate.begin() + static_cast<std::ptrdiff_t>(n));
  out.u2.assign(iterate.begin() + static_cast<std::ptrdiff_t>(n), iterate.end());
  out.step_index = state.step_index + 1;
  out.fp_iterations_last = k;

  if (diag) {
    double scale = 0.0, energy = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      scale += mass_[p] * (std::abs(state.u1[p]) + std::abs(state.u2[p]));
      energy += mass_[p] * (out.u1[p] * out.u1[p] + out.u2[p] * out.u2[p]);
    }
    const double drift = std::max(std::abs(weighted_sum(mass_, out.u1) - weighted_sum(mass_, state.u1)),
                                  std::abs(weighted_sum(mass_, out.u2) - weighted_sum(mass_, state.u2)));
    diag->step = out.step_index;
    diag->fp_iters = k;
    diag->fp_residual = residual;
    diag->mass_drift = scale > 0.0 ? drift / scale : drift;
    diag->energy = energy;
    diag->stalled = !converged;
  }
  return out;
}

CdState qss_step(const CdState& state, std::span<const double> u10, std::span<const double> u20,
                 const CdConfig& cfg, const Grid& grid, StepDiagnostics* diag) {
  return QssStepper(grid, cfg).step(state, u10, u20, diag);
}

CdResult denoise_cd(const Image& noisy, const CdConfig& cfg) {
  const Grid grid = build_grid(noisy.width(), noisy.height());
  QssStepper stepper(grid, cfg);
  const std::size_t steps = step_count(cfg.t_final, cfg.tau);

  const std::vector<double> u10 = noisy.data();
  const std::vector<double> u20(u10.size(), 0.0);
  CdState state{u10, u20, 0, 0};
  CdResult result;
  result.steps.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    StepDiagnostics d;
    state = stepper.step(state, u10, u20, &d);
    result.steps.push_back(d);
  }
  result.denoised = Image(noisy.width(), noisy.height(), std::move(state.u1));
  result.u2 = Image(noisy.width(), noisy.height(), std::move(state.u2));
  return result;
}

Image rescale_for_display(const Image& field) {
  const auto [lo, hi] = std::minmax_element(field.pixels().begin(), field.pixels().end());
  Image out(field.width(), field.height(), 0.0);
  const double range = *hi - *lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = 255.0 * (field[i] - *lo) / range;
  return out;
}

SteadyResult solve_steady(const SteadyProblem& prob, const DiffusionMatrix& a, const EdgeDetector& detector,
                          const Grid& grid, const SteadyOptions& opts) {
  const std::size_t n = grid.node_count();
  if (prob.g1.size() != n || prob.g2.size() != n) throw Error(ErrorCode::BadDimensions, "sources do not match grid");
  if (!(prob.gamma[0] > 0.0) || !(prob.gamma[1] > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  }
  if (!(opts.fp_tol > 0.0) || opts.max_fp_iter == 0) {
    throw Error(ErrorCode::InvalidArgument, "fixed-point tolerance and iteration cap must be positive");
  }
  detector.validate();
  check_hypothesis(a);

  const std::vector<double> mass = lumped_mass(grid);
  SystemAssembler assembler(grid);
  std::vector<double> rhs(2 * n), iterate(2 * n);
  for (std::size_t p = 0; p < n; ++p) {
    rhs[p] = mass[p] * prob.g1[p];
    rhs[n + p] = mass[p] * prob.g2[p];
    iterate[p] = prob.g1[p] / prob.gamma[0];
    iterate[n + p] = prob.g2[p] / prob.gamma[1];
  }

  auto component_diff = [&](std::span<const double> x, std::span<const double> y) {
    return std::max(diff_norm(x.first(n), y.first(n)), diff_norm(x.subspan(n), y.subspan(n)));
  };
  // System matrix with g lagged at u.
  auto lagged_system = [&](std::span<const double> u) -> const SparseMatrix& {
    assembler.stiffness(detector_at_quadrature(grid, detector, u.subspan(n)));
    return assembler.coupled(a, mass, prob.gamma);
  };

  const std::vector<double> start = iterate;
  SteadyResult result;
  std::size_t k = 0;
  double residual = std::numeric_limits<double>::infinity();
  std::vector<double> best = iterate;
  double best_residual = residual;
  AndersonMixer mixer(opts.anderson_depth);
  while (k < opts.max_fp_iter) {
    ++k;
    std::vector<double> next = solve_linear(lagged_system(iterate), rhs, opts.solver, iterate);
    // Residual of the plain map S(u) - u; the update itself is mixed.
    residual = component_diff(next, iterate);
    if (residual < best_residual) {
      best_residual = residual;
      best = iterate;
    }
    if (residual < opts.fp_tol) {
      iterate = std::move(next);
      result.converged = true;
      break;
    }
    iterate = mixer.update(iterate, next);
  }

  // Pseudo-transient continuation on F(u) = S_g(u) u - rhs, restarted from
  // G / gamma: Newton steps on M (u' - u) / dt + F(u') = 0. dt grows while
  // ||F|| falls, so the iteration follows the flow towards a stable steady
  // state (the lagged loop can park next to an unstable one) and becomes
  // plain Newton near it. Convergence is still judged by the lagged map.
  if (!result.converged && opts.continuation_max_iter > 0) {
    auto nonlinear_residual = [&](std::span<const double> u) {
      std::vector<double> f = lagged_system(u) * u;
      for (std::size_t i = 0; i < f.size(); ++i) f[i] -= rhs[i];
      return f;
    };
    std::vector<double> u = start;
    std::vector<double> f = nonlinear_residual(u);
    double f_norm = norm2(f);
    double dt = 0.1;
    for (std::size_t it = 0; it < opts.continuation_max_iter && !result.converged; ++it) {
      ++k;
      std::vector<Triplet> shift(2 * n);
      for (std::size_t i = 0; i < 2 * n; ++i) shift[i] = {i, i, mass[i % n] / dt};
      const SparseMatrix jac = add(add(lagged_system(u), detector_sensitivity(grid, detector, a, u)),
                                   SparseMatrix::from_triplets(2 * n, 2 * n, std::move(shift)));
      std::vector<double> neg_f(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) neg_f[i] = -f[i];
      std::vector<double> trial;
      try {
        trial = solve_linear(jac, neg_f, opts.solver);
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += u[i];
      } catch (const Error&) {
        trial.clear();
      }
      std::vector<double> f_trial = trial.empty() ? std::vector<double>{} : nonlinear_residual(trial);
      const double trial_norm = trial.empty() ? std::numeric_limits<double>::infinity() : norm2(f_trial);
      if (!(trial_norm <= 2.0 * f_norm)) {
        dt *= 0.25;
        if (dt < 1e-12) break;
        continue;
      }
      dt = trial_norm < f_norm ? std::min(dt * std::min(4.0, f_norm / trial_norm), 1e15) : dt;
      u = std::move(trial);
      f = std::move(f_trial);
      f_norm = trial_norm;
      std::vector<double> next = solve_linear(lagged_system(u), rhs, opts.solver, u);
      residual = component_diff(next, u);
      if (residual < best_residual) {
        best_residual = residual;
        best = u;
      }
      if (residual < opts.fp_tol) {
        iterate = std::move(next);
        result.converged = true;
      }
    }
  }
  if (!result.converged) {
    residual = std::min(residual, best_residual);
    iterate = best;
  }
  if (!result.converged && opts.on_stall == StallPolicy::Abort) {
    throw Error(ErrorCode::FixedPointStalled, "steady fixed point residual " + std::to_string(residual) +
                                                  " after " + std::to_string(k) + " iterations");
  }

  result.state.u1.assign(iterate.begin(), iterate.begin() + static_cast<std::ptrdiff_t>(n));
  result.state.u2.assign(iterate.begin() + static_cast<std::ptrdiff_t>(n), iterate.end());
  result.state.fp_iterations_last = k;
  result.fp_iterations = k;
  result.fp_residual = residual;

  auto sup = [](std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  const double alpha21 = std::abs(a.alpha(1, 0));
  const double alpha12 = std::abs(a.alpha(0, 1));
  result.linf_lhs = prob.gamma[0] * (1.0 - alpha21) * sup(result.state.u1) +
                    prob.gamma[1] * (1.0 - alpha12) * sup(result.state.u2);
  result.linf_rhs = (1.0 + alpha21) * sup(prob.g1) + (1.0 + alpha12) * sup(prob.g2);
  result.linf_bound_holds = result.linf_lhs <= result.linf_rhs;
  return result;
}

std::vector<double> lumped_laplacian(const Grid& grid, std::span<const double> u) {
  if (u.size() != grid.node_count()) throw Error(ErrorCode::BadDimensions, "field does not match grid");
  const QuadratureField ones{std::vector<double>(4 * grid.cell_count(), 1.0)};
  const SparseMatrix k = assemble_stiffness(grid, ones);
  const std::vector<double> mass = lumped_mass(grid);
  std::vector<double> lu = k * u;
  for (std::size_t p = 0; p < lu.size(); ++p) lu[p] = -lu[p] / mass[p];
  return lu;
}

double small_time_consistency(std::span<const double> u10, double theta, double tau, const Grid& grid) {
  const std::vector<double> lap = lumped_laplacian(grid, u10);
  const double lap_norm = norm2(lap);
  // Constant fields give a Laplacian made of rounding noise only.
  if (lap_norm <= 1e-12 * norm2(u10)) return 0.0;

  CdConfig cfg;
  cfg.tau = tau;
  cfg.t_final = tau;
  cfg.theta = theta;
  cfg.detector = EdgeDetector::constant(1.0);
  // The probe divides u2 by tau, so the linear solves must be far tighter
  // than the O(tau) quantity being measured.
  cfg.solver.rel_tol = 1e-14;
  cfg.fp_tol = 1e-12;

  const CdState start{std::vector<double>(u10.begin(), u10.end()), std::vector<double>(u10.size(), 0.0), 0, 0};
  const CdState next = qss_step(start, {}, {}, cfg, grid);
  const double s = std::sin(theta);
  double dev = 0.0;
  for (std::size_t p = 0; p < lap.size(); ++p) {
    const double d = next.u2[p] / tau - s * lap[p];
    dev += d * d;
  }
  return std::sqrt(dev) / lap_norm;
}

}  // namespace crossdiff
