#include "crossdiff/pm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crossdiff/assembly.hpp"
#include "crossdiff/error.hpp"

namespace crossdiff {

namespace {

void validate(const PmConfig& cfg) {
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (!(cfg.fp_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "fp_tol must be positive");
  if (cfg.max_fp_iter == 0) throw Error(ErrorCode::InvalidArgument, "max_fp_iter must be positive");
  cfg.detector.validate();
}

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

}  // namespace

PmResult denoise_pm_grad(const Image& noisy, const PmConfig& cfg) {
  validate(cfg);
  const Grid grid = build_grid(noisy.width(), noisy.height());
  const std::vector<double> mass = lumped_mass(grid);
  SystemAssembler assembler(grid);
  const std::size_t n = grid.node_count();
  const std::size_t steps = step_count(cfg.t_final, cfg.tau);
  const double inv_tau = 1.0 / cfg.tau;

  std::vector<double> u = noisy.data();
  PmResult result;
  result.steps.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    std::vector<double> rhs(n);
    for (std::size_t p = 0; p < n; ++p) rhs[p] = inv_tau * mass[p] * u[p];

    std::vector<double> iterate = u;
    std::size_t k = 0;
    double residual = 0.0;
    bool converged = false;
    while (k < cfg.max_fp_iter) {
      ++k;
      QuadratureField g = gradient_magnitude_at_quadrature(grid, iterate);
      for (double& v : g.values) v = cfg.detector(v);
      assembler.stiffness(g);
      const SparseMatrix& system = assembler.scalar(mass, inv_tau);
      std::vector<double> next = solve_linear(system, rhs, cfg.solver, iterate);
      residual = diff_norm(next, iterate);
      iterate = std::move(next);
      if (residual < cfg.fp_tol) {
        converged = true;
        break;
      }
    }
    if (!converged && cfg.on_stall == StallPolicy::Abort) {
      throw Error(ErrorCode::FixedPointStalled, "fixed point residual " + std::to_string(residual) + " after " +
                                                    std::to_string(k) + " iterations");
    }

    StepDiagnostics d;
    d.step = s + 1;
    d.fp_iters = k;
    d.fp_residual = residual;
    double scale = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      scale += mass[p] * std::abs(u[p]);
      d.energy += mass[p] * iterate[p] * iterate[p];
    }
    const double drift = std::abs(weighted_sum(mass, iterate) - weighted_sum(mass, u));
    d.mass_drift = scale > 0.0 ? drift / scale : drift;
    d.stalled = !converged;
    result.steps.push_back(d);
    u = std::move(iterate);
  }
  result.denoised = Image(noisy.width(), noisy.height(), std::move(u));
  return result;
}

Image five_point_laplacian(const Image& u) {
  const std::size_t w = u.width(), h = u.height();
  Image lap(w, h, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double c = u(x, y);
      const double left = x > 0 ? u(x - 1, y) : c;
      const double right = x + 1 < w ? u(x + 1, y) : c;
      const double up = y > 0 ? u(x, y - 1) : c;
      const double down = y + 1 < h ? u(x, y + 1) : c;
      lap(x, y) = (left - c) + (right - c) + (up - c) + (down - c);
    }
  }
  return lap;
}

Image pm_lap_step(const Image& u, const EdgeDetector& detector, double tau) {
  const std::size_t w = u.width(), h = u.height();
  const Image lap = five_point_laplacian(u);
  Image g(w, h);
  for (std::size_t i = 0; i < u.size(); ++i) g[i] = detector(std::abs(lap[i]));

  Image out = u;
  // Each interior face moves the same amount out of one pixel and into its
  // neighbour, so the total is conserved up to rounding.
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x + 1 < w; ++x) {
      const double flux = tau * 0.5 * (g(x, y) + g(x + 1, y)) * (u(x + 1, y) - u(x, y));
      out(x, y) += flux;
      out(x + 1, y) -= flux;
    }
  }
  for (std::size_t y = 0; y + 1 < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double flux = tau * 0.5 * (g(x, y) + g(x, y + 1)) * (u(x, y + 1) - u(x, y));
      out(x, y) += flux;
      out(x, y + 1) -= flux;
    }
  }
  return out;
}

PmResult denoise_pm_lap(const Image& noisy, const PmConfig& cfg) {
  validate(cfg);
  if (noisy.width() < 3 || noisy.height() < 3) {
    throw Error(ErrorCode::TooSmall, "Laplacian-based filter needs at least 3x3 pixels");
  }
  if (cfg.tau * cfg.detector.supremum() > 0.25) {
    throw Error(ErrorCode::UnstableTimeStep,
                "tau * max g = " + std::to_string(cfg.tau * cfg.detector.supremum()) + " exceeds 1/4");
  }
  const std::size_t steps = step_count(cfg.t_final, cfg.tau);
  PmResult result;
  result.steps.reserve(steps);
  Image u = noisy;
  for (std::size_t s = 0; s < steps; ++s) {
    Image next = pm_lap_step(u, cfg.detector, cfg.tau);
    StepDiagnostics d;
    d.step = s + 1;
    double before = 0.0, after = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      before += u[i];
      after += next[i];
      scale += std::abs(u[i]);
      d.energy += next[i] * next[i];
    }
    d.mass_drift = scale > 0.0 ? std::abs(after - before) / scale : std::abs(after - before);
    result.steps.push_back(d);
    u = std::move(next);
  }
  result.denoised = std::move(u);
  return result;
}

}  // namespace crossdiff
