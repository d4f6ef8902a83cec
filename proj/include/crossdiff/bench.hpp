#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "crossdiff/crossdiff.hpp"
#include "crossdiff/image.hpp"
#include "crossdiff/metrics.hpp"

namespace crossdiff {

enum class Method { Cd, PmGrad, PmLap, Bf, Nlm };

Method method_from_string(const std::string& name);
std::string to_string(Method method);
/// Column label used in table output: CD, PM-L, PM-G, BF, NLM.
std::string table_label(Method method);
/// The order methods appear in table output.
const std::vector<Method>& table_methods();

using ParamMap = std::map<std::string, double>;

/// Adds defaults (tau, tol, theta, beta1, beta2, patch-radius, search-radius)
/// and throws InvalidArgument when a required parameter is missing:
///   cd: T lambda;  pm-*: T lambda;  bf: h rho;  nlm: sigma.
ParamMap complete_params(Method method, ParamMap params);

struct RunOutput {
  Image denoised;
  std::vector<StepDiagnostics> steps;
};

RunOutput run_method(Method method, const Image& noisy, const ParamMap& params);

/// Sweep axes keep the order in which they were given.
using ParamGrid = std::vector<std::pair<std::string, std::vector<double>>>;

struct SweepSpec {
  Method method = Method::Cd;
  ParamGrid grid;
  ParamMap fixed;
  std::vector<std::uint64_t> seeds = {0};
  double snr = 10.0;
};

struct SweepRow {
  ParamMap params;
  double psnr = 0.0;
  double ncc = 0.0;
  double ssim = 0.0;
  std::size_t grid_index = 0;
};

/// Evaluates every grid point (metrics averaged over seeds, noise drawn at
/// spec.snr for each seed) and returns rows sorted by descending PSNR, ties
/// broken by grid order. Up to `jobs` grid points run concurrently; the
/// result does not depend on scheduling.
std::vector<SweepRow> run_sweep(const Image& clean, const SweepSpec& spec, unsigned jobs = 1);

/// Cartesian product, last axis varying fastest.
std::vector<ParamMap> expand_grid(const ParamGrid& grid, const ParamMap& fixed);

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows);

/// Default search ranges around the regimes that work for natural images.
ParamGrid default_grid(Method method);

struct TableCell {
  std::string params;
  QualityReport quality;
};

struct TableBlock {
  std::string image;
  QualityReport initial;
  std::vector<std::pair<Method, TableCell>> methods;
};

struct TableOptions {
  double snr = 10.0;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::map<Method, ParamGrid> grids;  // empty entries fall back to default_grid
};

TableBlock reproduce_table_block(const std::string& name, const Image& clean, const TableOptions& opts);

/// Rows "Opt. Par.", "PSNR", "NCC", "SSIM" per image; columns Initial, CD,
/// PM-L, PM-G, BF, NLM.
void write_table_csv(std::ostream& os, const std::vector<TableBlock>& blocks);

void write_diagnostics_csv(std::ostream& os, const std::vector<StepDiagnostics>& steps);

/// Six significant digits, '.' decimal separator, independent of locale.
std::string format_number(double v, int significant = 6);

}  // namespace crossdiff
