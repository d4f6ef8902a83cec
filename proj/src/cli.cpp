#include "crossdiff/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "crossdiff/bench.hpp"
#include "crossdiff/error.hpp"
#include "crossdiff/metrics.hpp"
#include "crossdiff/noise.hpp"
#include "crossdiff/pgm.hpp"
#include "crossdiff/synthetic.hpp"

namespace crossdiff {
namespace {

namespace fs = std::filesystem;

// Method parameters in the order they appear in CSV headers.
const std::vector<std::string>& param_names() {
  static const std::vector<std::string> names = {"T",   "tau", "tol",   "lambda",       "theta",        "beta1",
                                                 "beta2", "h", "rho", "sigma", "patch-radius", "search-radius"};
  return names;
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(const std::string& flag, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw UsageError("--" + flag + ": not a number: '" + t + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_real(flag, std::string_view(text).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::uint64_t parse_seed(const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw UsageError("--seed: not a non-negative integer: '" + t + "'");
  }
  return v;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_seed(item));
  if (out.empty()) throw UsageError("--seed: empty list");
  return out;
}

unsigned effective_jobs(int requested) {
  if (requested < 1) throw UsageError("--jobs must be >= 1");
  unsigned jobs = static_cast<unsigned>(requested);
  if (const char* env = std::getenv("CROSSDIFF_THREADS")) {
    unsigned cap = 0;
    const std::string s = env;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size() && cap > 0) jobs = std::min(jobs, cap);
  }
  return jobs;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::MalformedHeader:
    case ErrorCode::TruncatedData:
    case ErrorCode::UnsupportedMaxval:
    case ErrorCode::ConstantImage:
      return kExitIo;
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadDimensions:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::TooSmall:
    case ErrorCode::HypothesisViolated:
      return kExitUsage;
    case ErrorCode::ZeroDenominator:
    case ErrorCode::ZeroNorm:
    case ErrorCode::NonPositiveDetector:
    case ErrorCode::SolverDiverged:
    case ErrorCode::SingularMatrix:
    case ErrorCode::FixedPointStalled:
    case ErrorCode::UnstableTimeStep:
      return kExitNumerical;
  }
  return kExitNumerical;
}

std::string describe(const Error& e) {
  if (e.code() == ErrorCode::ConstantImage) return std::string("constant image: SNR is undefined (") + e.what() + ")";
  return e.what();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

// Appends `--key value` for every config entry whose flag was not given on
// the command line. Flags always win over the file.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config file '" + *path + "'");
  const auto entries = parse_config(in);
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  for (const auto& [key, value] : entries) {
    if (key == "config") throw UsageError("config files cannot include other config files");
    if (given(key)) continue;
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

struct Params {
  std::map<std::string, std::string> raw;

  void attach(CLI::App* app) {
    for (const auto& name : param_names()) app->add_option("--" + name, raw[name], "method parameter");
  }
  bool has(const std::string& name) const {
    const auto it = raw.find(name);
    return it != raw.end() && !it->second.empty();
  }
  ParamMap scalars() const {
    ParamMap p;
    for (const auto& name : param_names()) {
      if (has(name)) p[name] = parse_real(name, raw.at(name));
    }
    return p;
  }
  ParamGrid grid() const {
    ParamGrid g;
    for (const auto& name : param_names()) {
      if (has(name)) g.emplace_back(name, parse_list(name, raw.at(name)));
    }
    return g;
  }
};

Method parse_method(const std::string& name) {
  try {
    return method_from_string(name);
  } catch (const Error&) {
    throw UsageError("unknown method '" + name + "' (expected cd, pm-grad, pm-lap, bf or nlm)");
  }
}

std::string full(double v) { return format_number(v, 12); }

struct AddNoiseArgs {
  std::string in, out, seed = "0";
  double snr_target = 0.0;
};

int cmd_add_noise(const AddNoiseArgs& a, std::ostream& out) {
  const Image clean = read_pgm_file(a.in);
  const Image noisy = add_gaussian_noise(clean, {a.snr_target, parse_seed(a.seed)});
  const auto bytes = save_pgm(noisy);
  write_text_file(a.out, std::string(bytes.begin(), bytes.end()));
  out << "snr=" << format_number(snr(clean, load_pgm(bytes))) << '\n';
  return kExitOk;
}

struct DenoiseArgs {
  std::string in, out, ref, method, diag, seed = "0";
  double snr_target = 0.0;
  bool add_noise = false;
  Params params;
};

int cmd_denoise(const DenoiseArgs& a, std::ostream& out) {
  const Method method = parse_method(a.method);
  const ParamMap params = a.params.scalars();
  complete_params(method, params);
  const Image input = read_pgm_file(a.in);
  std::optional<Image> reference;
  if (!a.ref.empty()) reference = read_pgm_file(a.ref);
  Image noisy = input;
  if (a.add_noise) {
    noisy = add_gaussian_noise(input, {a.snr_target, parse_seed(a.seed)});
    if (!reference) reference = input;
  }
  const RunOutput result = run_method(method, noisy, params);
  write_pgm_file(a.out, result.denoised);
  if (!a.diag.empty()) {
    std::ostringstream os;
    write_diagnostics_csv(os, result.steps);
    write_text_file(a.diag, os.str());
  }
  if (reference) {
    const QualityReport q = quality(*reference, result.denoised);
    out << "method=" << to_string(method) << " psnr=" << full(q.psnr) << " ncc=" << full(q.ncc)
        << " ssim=" << full(q.ssim) << '\n';
  }
  return kExitOk;
}

struct SweepArgs {
  std::string in, out, method, seed = "0";
  double snr_target = 10.0;
  int jobs = 1;
  Params params;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  SweepSpec spec;
  spec.method = parse_method(a.method);
  spec.grid = a.params.grid();
  if (spec.grid.empty()) spec.grid = default_grid(spec.method);
  spec.seeds = parse_seeds(a.seed);
  spec.snr = a.snr_target;
  const unsigned jobs = effective_jobs(a.jobs);
  const Image clean = read_pgm_file(a.in);
  const auto rows = run_sweep(clean, spec, jobs);
  std::ostringstream csv;
  write_sweep_csv(csv, spec, rows);
  if (a.out.empty()) {
    out << csv.str();
  } else {
    write_text_file(a.out, csv.str());
  }
  const SweepRow& best = rows.front();
  out << "best:";
  for (const auto& [name, values] : spec.grid) out << ' ' << name << '=' << full(best.params.at(name));
  out << " psnr=" << full(best.psnr) << " ncc=" << full(best.ncc) << " ssim=" << full(best.ssim) << '\n';
  return kExitOk;
}

struct TablesArgs {
  std::string in, out, seed = "0";
  double snr_target = 10.0;
  int jobs = 1;
  std::size_t size = 128;
};

int cmd_reproduce_tables(const TablesArgs& a, std::ostream& out) {
  TableOptions opts;
  opts.snr = a.snr_target;
  opts.seed = parse_seed(a.seed);
  opts.jobs = effective_jobs(a.jobs);

  std::vector<std::pair<std::string, Image>> images;
  if (a.in.empty()) {
    images.emplace_back("shapes", generate_synthetic(SyntheticKind::Shapes, a.size, opts.seed));
    images.emplace_back("texture", generate_synthetic(SyntheticKind::Texture, a.size, opts.seed));
  } else {
    std::error_code ec;
    if (!fs::is_directory(a.in, ec)) throw Error(ErrorCode::Io, "not a directory: '" + a.in + "'");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.in, ec)) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    if (ec) throw Error(ErrorCode::Io, "cannot list '" + a.in + "': " + ec.message());
    if (files.empty()) throw UsageError("no .pgm images in '" + a.in + "'");
    std::sort(files.begin(), files.end());
    for (const auto& f : files) images.emplace_back(f.stem().string(), read_pgm_file(f));
  }

  std::vector<TableBlock> blocks;
  for (const auto& [name, img] : images) blocks.push_back(reproduce_table_block(name, img, opts));
  std::ostringstream csv;
  write_table_csv(csv, blocks);
  if (a.out.empty()) {
    out << csv.str();
  } else {
    write_text_file(a.out, csv.str());
  }
  return kExitOk;
}

struct GenerateArgs {
  std::string out, kind = "shapes", seed = "0";
  std::size_t size = 128;
};

int cmd_generate(const GenerateArgs& a) {
  SyntheticKind kind;
  try {
    kind = synthetic_kind_from_string(a.kind);
  } catch (const Error&) {
    throw UsageError("unknown kind '" + a.kind + "' (expected shapes or texture)");
  }
  write_pgm_file(a.out, generate_synthetic(kind, a.size, parse_seed(a.seed)));
  return kExitOk;
}

struct MetricsArgs {
  std::string in, ref;
};

int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
  const Image test = read_pgm_file(a.in);
  const Image ref = read_pgm_file(a.ref);
  const QualityReport q = quality(ref, test);
  out << "psnr=" << full(q.psnr) << " ncc=" << full(q.ncc) << " ssim=" << full(q.ssim) << '\n';
  return kExitOk;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + ": empty key or value");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

int run_cli(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-diffusion and reference image denoisers", "crossdiff"};
  app.set_help_flag("--help", "print usage");
  app.require_subcommand(1);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", config_path, "key = value parameter file"); };

  AddNoiseArgs noise_args;
  auto* noise_cmd = app.add_subcommand("add-noise", "add Gaussian noise at a target SNR");
  noise_cmd->add_option("--in", noise_args.in, "clean PGM")->required();
  noise_cmd->add_option("--out", noise_args.out, "noisy PGM")->required();
  noise_cmd->add_option("--snr", noise_args.snr_target, "target SNR")->required();
  noise_cmd->add_option("--seed", noise_args.seed, "noise seed");
  add_config(noise_cmd);

  DenoiseArgs den_args;
  auto* den_cmd = app.add_subcommand("denoise", "denoise an image with one method");
  den_cmd->add_option("--in", den_args.in, "input PGM")->required();
  den_cmd->add_option("--out", den_args.out, "output PGM")->required();
  den_cmd->add_option("--method", den_args.method, "cd, pm-grad, pm-lap, bf or nlm")->required();
  den_cmd->add_option("--ref", den_args.ref, "clean reference for metrics");
  den_cmd->add_option("--snr", den_args.snr_target, "treat --in as clean and add noise at this SNR first");
  den_cmd->add_option("--seed", den_args.seed, "noise seed used with --snr");
  den_cmd->add_option("--diag", den_args.diag, "per-step diagnostics CSV");
  den_args.params.attach(den_cmd);
  add_config(den_cmd);

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "PSNR-maximizing parameter sweep");
  sweep_cmd->add_option("--in", sweep_args.in, "clean PGM")->required();
  sweep_cmd->add_option("--out", sweep_args.out, "results CSV (stdout if omitted)");
  sweep_cmd->add_option("--method", sweep_args.method, "cd, pm-grad, pm-lap, bf or nlm")->required();
  sweep_cmd->add_option("--snr", sweep_args.snr_target, "noise SNR");
  sweep_cmd->add_option("--seed", sweep_args.seed, "comma-separated noise seeds");
  sweep_cmd->add_option("--jobs", sweep_args.jobs, "concurrent grid points");
  sweep_args.params.attach(sweep_cmd);
  add_config(sweep_cmd);

  TablesArgs tab_args;
  auto* tab_cmd = app.add_subcommand("reproduce-tables", "optimal parameters and quality for all methods");
  tab_cmd->add_option("--in", tab_args.in, "directory of clean PGMs (built-in synthetic set if omitted)");
  tab_cmd->add_option("--out", tab_args.out, "table CSV (stdout if omitted)");
  tab_cmd->add_option("--snr", tab_args.snr_target, "noise SNR");
  tab_cmd->add_option("--seed", tab_args.seed, "noise seed");
  tab_cmd->add_option("--jobs", tab_args.jobs, "concurrent grid points");
  tab_cmd->add_option("--size", tab_args.size, "synthetic image size");
  add_config(tab_cmd);

  GenerateArgs gen_args;
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic test image");
  gen_cmd->add_option("--out", gen_args.out, "output PGM")->required();
  gen_cmd->add_option("--kind", gen_args.kind, "shapes or texture");
  gen_cmd->add_option("--size", gen_args.size, "width and height");
  gen_cmd->add_option("--seed", gen_args.seed, "generator seed");

  MetricsArgs met_args;
  auto* met_cmd = app.add_subcommand("metrics", "PSNR, NCC and SSIM of an image against a reference");
  met_cmd->add_option("--in", met_args.in, "test PGM")->required();
  met_cmd->add_option("--ref", met_args.ref, "reference PGM")->required();

  try {
    std::vector<std::string> args = merge_config(args_in);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "crossdiff: " << e.what() << '\n';
      const auto subs = app.get_subcommands();
      err << (subs.empty() ? app.help() : subs.front()->help());
      return kExitUsage;
    }

    if (*noise_cmd) return cmd_add_noise(noise_args, out);
    if (*den_cmd) {
      den_args.add_noise = den_cmd->count("--snr") > 0;
      return cmd_denoise(den_args, out);
    }
    if (*sweep_cmd) return cmd_sweep(sweep_args, out);
    if (*tab_cmd) return cmd_reproduce_tables(tab_args, out);
    if (*gen_cmd) return cmd_generate(gen_args);
    if (*met_cmd) return cmd_metrics(met_args, out);
    err << app.help();
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "crossdiff: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "crossdiff: " << describe(e) << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "crossdiff: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace crossdiff
