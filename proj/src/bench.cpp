#include "crossdiff/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <thread>

#include "crossdiff/error.hpp"
#include "crossdiff/noise.hpp"
#include "crossdiff/patch.hpp"
#include "crossdiff/pm.hpp"

namespace crossdiff {

namespace {

double get(const ParamMap& p, const std::string& key) { return p.at(key); }

std::size_t get_count(const ParamMap& p, const std::string& key) {
  const double v = p.at(key);
  if (!(v >= 1.0) || v != std::floor(v)) {
    throw Error(ErrorCode::InvalidArgument, key + " must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

void require(const ParamMap& p, std::initializer_list<const char*> keys, Method m) {
  for (const char* k : keys) {
    if (!p.contains(k)) {
      throw Error(ErrorCode::InvalidArgument, "method " + to_string(m) + " requires parameter '" + k + "'");
    }
  }
}

}  // namespace

Method method_from_string(const std::string& name) {
  if (name == "cd") return Method::Cd;
  if (name == "pm-grad") return Method::PmGrad;
  if (name == "pm-lap") return Method::PmLap;
  if (name == "bf") return Method::Bf;
  if (name == "nlm") return Method::Nlm;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "' (cd, pm-grad, pm-lap, bf, nlm)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::Cd: return "cd";
    case Method::PmGrad: return "pm-grad";
    case Method::PmLap: return "pm-lap";
    case Method::Bf: return "bf";
    case Method::Nlm: return "nlm";
  }
  return "cd";
}

std::string table_label(Method method) {
  switch (method) {
    case Method::Cd: return "CD";
    case Method::PmGrad: return "PM-G";
    case Method::PmLap: return "PM-L";
    case Method::Bf: return "BF";
    case Method::Nlm: return "NLM";
  }
  return "CD";
}

const std::vector<Method>& table_methods() {
  static const std::vector<Method> order = {Method::Cd, Method::PmLap, Method::PmGrad, Method::Bf, Method::Nlm};
  return order;
}

ParamMap complete_params(Method method, ParamMap p) {
  switch (method) {
    case Method::Cd:
      p.try_emplace("theta", std::numbers::pi / 30.0);
      p.try_emplace("beta1", 0.0);
      p.try_emplace("beta2", 0.0);
      [[fallthrough]];
    case Method::PmGrad:
    case Method::PmLap:
      p.try_emplace("tau", 0.01);
      p.try_emplace("tol", 1e-3);
      require(p, {"T", "lambda"}, method);
      break;
    case Method::Bf:
      require(p, {"h", "rho"}, method);
      break;
    case Method::Nlm:
      p.try_emplace("patch-radius", 2.0);
      p.try_emplace("search-radius", 10.0);
      require(p, {"sigma"}, method);
      break;
  }
  return p;
}

RunOutput run_method(Method method, const Image& noisy, const ParamMap& params) {
  const ParamMap p = complete_params(method, params);
  RunOutput out;
  switch (method) {
    case Method::Cd: {
      CdConfig cfg;
      cfg.t_final = get(p, "T");
      cfg.tau = get(p, "tau");
      cfg.fp_tol = get(p, "tol");
      cfg.theta = get(p, "theta");
      cfg.beta = {get(p, "beta1"), get(p, "beta2")};
      cfg.detector = EdgeDetector::exponential(get(p, "lambda"));
      auto r = denoise_cd(noisy, cfg);
      out.denoised = std::move(r.denoised);
      out.steps = std::move(r.steps);
      break;
    }
    case Method::PmGrad:
    case Method::PmLap: {
      PmConfig cfg;
      cfg.t_final = get(p, "T");
      cfg.tau = get(p, "tau");
      cfg.fp_tol = get(p, "tol");
      cfg.detector = EdgeDetector::exponential(get(p, "lambda"));
      auto r = method == Method::PmGrad ? denoise_pm_grad(noisy, cfg) : denoise_pm_lap(noisy, cfg);
      out.denoised = std::move(r.denoised);
      out.steps = std::move(r.steps);
      break;
    }
    case Method::Bf:
      out.denoised = yaroslavsky(noisy, {get(p, "h"), get(p, "rho")});
      break;
    case Method::Nlm: {
      NlmConfig cfg;
      cfg.sigma = get(p, "sigma");
      if (p.contains("h")) cfg.h = get(p, "h");
      cfg.patch_radius = get_count(p, "patch-radius");
      cfg.search_radius = get_count(p, "search-radius");
      out.denoised = nlm(noisy, cfg);
      break;
    }
  }
  return out;
}

std::vector<ParamMap> expand_grid(const ParamGrid& grid, const ParamMap& fixed) {
  std::vector<ParamMap> points{fixed};
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid for parameter '" + name + "'");
    std::vector<ParamMap> next;
    next.reserve(points.size() * values.size());
    for (const auto& base : points) {
      for (double v : values) {
        ParamMap m = base;
        m[name] = v;
        next.push_back(std::move(m));
      }
    }
    points = std::move(next);
  }
  return points;
}

std::vector<SweepRow> run_sweep(const Image& clean, const SweepSpec& spec, unsigned jobs) {
  if (spec.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one seed");
  const std::vector<ParamMap> points = expand_grid(spec.grid, spec.fixed);
  for (const auto& p : points) complete_params(spec.method, p);

  std::vector<Image> noisy;
  noisy.reserve(spec.seeds.size());
  for (auto seed : spec.seeds) noisy.push_back(add_gaussian_noise(clean, {spec.snr, seed}));

  std::vector<SweepRow> rows(points.size());
  auto evaluate = [&](std::size_t i) {
    SweepRow row;
    row.params = points[i];
    row.grid_index = i;
    for (const auto& input : noisy) {
      const Image out = run_method(spec.method, input, points[i]).denoised;
      const QualityReport q = quality(clean, out);
      row.psnr += q.psnr;
      row.ncc += q.ncc;
      row.ssim += q.ssim;
    }
    const double n = static_cast<double>(noisy.size());
    row.psnr /= n;
    row.ncc /= n;
    row.ssim /= n;
    rows[i] = std::move(row);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < points.size(); ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
          try {
            evaluate(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
  }

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.psnr > b.psnr; });
  return rows;
}

std::string format_number(double v, int significant) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, significant);
  return std::string(buf, res.ptr);
}

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  for (const auto& [name, values] : spec.grid) os << name << ',';
  os << "psnr,ncc,ssim\n";
  for (const auto& row : rows) {
    for (const auto& [name, values] : spec.grid) os << format_number(row.params.at(name)) << ',';
    os << format_number(row.psnr) << ',' << format_number(row.ncc) << ',' << format_number(row.ssim) << '\n';
  }
}

ParamGrid default_grid(Method method) {
  switch (method) {
    case Method::Cd: return {{"T", {0.1, 0.2, 0.3}}, {"lambda", {0.1, 0.15, 0.3}}};
    case Method::PmGrad: return {{"T", {0.1, 0.2, 0.3}}, {"lambda", {20, 40}}};
    case Method::PmLap: return {{"T", {0.3, 0.5, 0.8}}, {"lambda", {10, 20}}};
    case Method::Bf: return {{"h", {16, 32, 64}}, {"rho", {2, 3, 4}}};
    case Method::Nlm: return {{"sigma", {4, 6, 8, 10, 14}}};
  }
  return {};
}

TableBlock reproduce_table_block(const std::string& name, const Image& clean, const TableOptions& opts) {
  TableBlock block;
  block.image = name;
  const Image noisy = add_gaussian_noise(clean, {opts.snr, opts.seed});
  block.initial = quality(clean, noisy);
  for (Method m : table_methods()) {
    SweepSpec spec;
    spec.method = m;
    const auto it = opts.grids.find(m);
    spec.grid = (it != opts.grids.end() && !it->second.empty()) ? it->second : default_grid(m);
    spec.seeds = {opts.seed};
    spec.snr = opts.snr;
    const auto rows = run_sweep(clean, spec, opts.jobs);
    const SweepRow& best = rows.front();
    std::string label = "(";
    for (std::size_t i = 0; i < spec.grid.size(); ++i) {
      if (i) label += ", ";
      label += format_number(best.params.at(spec.grid[i].first));
    }
    label += ")";
    if (spec.grid.size() == 1) label = label.substr(1, label.size() - 2);
    block.methods.push_back({m, {label, {best.psnr, best.ncc, best.ssim}}});
  }
  return block;
}

void write_table_csv(std::ostream& os, const std::vector<TableBlock>& blocks) {
  os << "image,measure,Initial";
  for (Method m : table_methods()) os << ',' << table_label(m);
  os << '\n';
  for (const auto& b : blocks) {
    os << b.image << ",Opt. Par.,";
    for (const auto& [m, cell] : b.methods) os << ",\"" << cell.params << '"';
    os << '\n';
    auto row = [&](const char* label, double initial, auto field) {
      os << b.image << ',' << label << ',' << format_number(initial);
      for (const auto& [m, cell] : b.methods) os << ',' << format_number(field(cell.quality));
      os << '\n';
    };
    row("PSNR", b.initial.psnr, [](const QualityReport& q) { return q.psnr; });
    row("NCC", b.initial.ncc, [](const QualityReport& q) { return q.ncc; });
    row("SSIM", b.initial.ssim, [](const QualityReport& q) { return q.ssim; });
  }
}

void write_diagnostics_csv(std::ostream& os, const std::vector<StepDiagnostics>& steps) {
  os << "step,fp_iters,fp_residual,mass_drift,energy\n";
  for (const auto& s : steps) {
    os << s.step << ',' << s.fp_iters << ',' << format_number(s.fp_residual) << ',' << format_number(s.mass_drift)
       << ',' << format_number(s.energy) << '\n';
  }
}

}  // namespace crossdiff
