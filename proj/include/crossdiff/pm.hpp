#pragma once

#include <cstddef>
#include <vector>

#include "crossdiff/crossdiff.hpp"
#include "crossdiff/image.hpp"
#include "crossdiff/model.hpp"
#include "crossdiff/solver.hpp"

namespace crossdiff {

struct PmConfig {
  EdgeDetector detector = EdgeDetector::exponential(20.0);
  double tau = 0.01;
  double t_final = 0.3;
  double fp_tol = 1e-3;
  std::size_t max_fp_iter = 50;
  SolverConfig solver;
  StallPolicy on_stall = StallPolicy::Accept;
};

struct PmResult {
  Image denoised;
  std::vector<StepDiagnostics> steps;
};

/// Gradient-based Perona-Malik: Q1 finite elements in space, semi-implicit
/// in time with g(|grad u|) lagged one fixed-point iteration and evaluated at
/// the Gauss points.
PmResult denoise_pm_grad(const Image& noisy, const PmConfig& cfg);

/// Laplacian-based Perona-Malik, explicit finite differences:
///   u^{n+1} = u^n + tau * div_h(g_face * grad_h u^n)
/// with g evaluated on |Delta_h u^n| at pixels and averaged onto faces.
/// Boundary faces carry no flux. Requires tau * sup(g) <= 1/4.
PmResult denoise_pm_lap(const Image& noisy, const PmConfig& cfg);

/// One explicit step of the Laplacian-based scheme.
Image pm_lap_step(const Image& u, const EdgeDetector& detector, double tau);

/// Five-point Laplacian with edge-replicating (zero-flux) boundary.
Image five_point_laplacian(const Image& u);

}  // namespace crossdiff
