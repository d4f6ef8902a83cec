#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <numbers>
#include <string>

#include "crossdiff/bench.hpp"
#include "crossdiff/crossdiff.hpp"
#include "crossdiff/error.hpp"
#include "crossdiff/metrics.hpp"
#include "crossdiff/noise.hpp"
#include "crossdiff/patch.hpp"
#include "crossdiff/pgm.hpp"
#include "crossdiff/pm.hpp"
#include "crossdiff/synthetic.hpp"

namespace py = pybind11;
using namespace crossdiff;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Images cross the boundary as (height, width) float64 arrays.
Image to_image(const Array& a) {
  if (a.ndim() != 2) throw Error(ErrorCode::BadDimensions, "expected a 2-D array (height, width)");
  const auto h = static_cast<std::size_t>(a.shape(0));
  const auto w = static_cast<std::size_t>(a.shape(1));
  std::vector<double> px(a.data(), a.data() + w * h);
  return Image(w, h, std::move(px));
}

Array to_array(const Image& img) {
  Array out({img.height(), img.width()});
  std::memcpy(out.mutable_data(), img.data().data(), img.size() * sizeof(double));
  return out;
}

Array nodal_to_array(const std::vector<double>& v, std::size_t w, std::size_t h) {
  return to_array(Image(w, h, v));
}

EdgeDetector make_detector(const std::string& kind, double lambda) {
  switch (detector_kind_from_string(kind)) {
    case DetectorKind::Exponential: return EdgeDetector::exponential(lambda);
    case DetectorKind::Rational: return EdgeDetector::rational(lambda);
    case DetectorKind::Constant: return EdgeDetector::constant(lambda);
  }
  return EdgeDetector::exponential(lambda);
}

py::list diagnostics(const std::vector<StepDiagnostics>& steps) {
  py::list out;
  for (const auto& d : steps) {
    py::dict row;
    row["step"] = d.step;
    row["fp_iters"] = d.fp_iters;
    row["fp_residual"] = d.fp_residual;
    row["mass_drift"] = d.mass_drift;
    row["energy"] = d.energy;
    row["stalled"] = d.stalled;
    out.append(row);
  }
  return out;
}

py::dict quality_dict(const QualityReport& q) {
  py::dict d;
  d["psnr"] = q.psnr;
  d["ncc"] = q.ncc;
  d["ssim"] = q.ssim;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cross-diffusion denoising, reference filters and image metrics";

  // Messages start with the error code name, e.g. "TooSmall: ...".
  py::register_exception<Error>(m, "CrossdiffError", PyExc_RuntimeError);

  m.def("read_pgm", [](const std::filesystem::path& p) { return to_array(read_pgm_file(p)); }, py::arg("path"));
  m.def(
      "write_pgm",
      [](const std::filesystem::path& p, const Array& img, bool binary) { write_pgm_file(p, to_image(img), binary); },
      py::arg("path"), py::arg("image"), py::arg("binary") = true);

  m.def(
      "generate_synthetic",
      [](const std::string& kind, std::size_t size, std::uint64_t seed) {
        return to_array(generate_synthetic(synthetic_kind_from_string(kind), size, seed));
      },
      py::arg("kind") = "shapes", py::arg("size") = 128, py::arg("seed") = 0);

  m.def(
      "add_noise",
      [](const Array& img, double snr_target, std::uint64_t seed) {
        return to_array(add_gaussian_noise(to_image(img), {snr_target, seed}));
      },
      py::arg("image"), py::arg("snr") = 10.0, py::arg("seed") = 0);

  m.def("snr", [](const Array& a, const Array& b) { return snr(to_image(a), to_image(b)); }, py::arg("clean"),
        py::arg("noisy"));
  m.def("psnr", [](const Array& a, const Array& b) { return psnr(to_image(a), to_image(b)); });
  m.def("ncc", [](const Array& a, const Array& b) { return ncc(to_image(a), to_image(b)); });
  m.def("ssim", [](const Array& a, const Array& b) { return ssim(to_image(a), to_image(b)); });
  m.def("quality", [](const Array& ref, const Array& img) { return quality_dict(quality(to_image(ref), to_image(img))); },
        py::arg("reference"), py::arg("image"));

  m.def(
      "denoise_cd",
      [](const Array& img, double t_final, double lam, double theta, double tau, double tol, double beta1,
         double beta2, const std::string& detector) {
        CdConfig cfg;
        cfg.t_final = t_final;
        cfg.detector = make_detector(detector, lam);
        cfg.theta = theta;
        cfg.tau = tau;
        cfg.fp_tol = tol;
        cfg.beta = {beta1, beta2};
        const Image in = to_image(img);
        CdResult r;
        {
          py::gil_scoped_release release;
          r = denoise_cd(in, cfg);
        }
        return py::make_tuple(to_array(r.denoised), to_array(r.u2), diagnostics(r.steps));
      },
      py::arg("image"), py::arg("T") = 0.2, py::arg("lam") = 0.15, py::arg("theta") = std::numbers::pi / 30,
      py::arg("tau") = 0.01, py::arg("tol") = 1e-3, py::arg("beta1") = 0.0, py::arg("beta2") = 0.0,
      py::arg("detector") = "exponential",
      "Returns (denoised, u2, per-step diagnostics).");

  auto pm = [](bool laplacian) {
    return [laplacian](const Array& img, double t_final, double lam, double tau, const std::string& detector) {
      PmConfig cfg;
      cfg.t_final = t_final;
      cfg.detector = make_detector(detector, lam);
      cfg.tau = tau;
      const Image in = to_image(img);
      PmResult r;
      {
        py::gil_scoped_release release;
        r = laplacian ? denoise_pm_lap(in, cfg) : denoise_pm_grad(in, cfg);
      }
      return to_array(r.denoised);
    };
  };
  m.def("denoise_pm_grad", pm(false), py::arg("image"), py::arg("T") = 0.3, py::arg("lam") = 20.0,
        py::arg("tau") = 0.01, py::arg("detector") = "exponential");
  m.def("denoise_pm_lap", pm(true), py::arg("image"), py::arg("T") = 0.8, py::arg("lam") = 10.0,
        py::arg("tau") = 0.01, py::arg("detector") = "exponential");

  m.def(
      "yaroslavsky",
      [](const Array& img, double h, double rho) {
        const Image in = to_image(img);
        Image out;
        {
          py::gil_scoped_release release;
          out = yaroslavsky(in, {h, rho});
        }
        return to_array(out);
      },
      py::arg("image"), py::arg("h") = 64.0, py::arg("rho") = 4.0);

  m.def(
      "nlm",
      [](const Array& img, double sigma, double h, double kappa, std::size_t patch_radius, std::size_t search_radius) {
        NlmConfig cfg;
        cfg.sigma = sigma;
        cfg.h = h;
        cfg.kappa = kappa;
        cfg.patch_radius = patch_radius;
        cfg.search_radius = search_radius;
        const Image in = to_image(img);
        Image out;
        {
          py::gil_scoped_release release;
          out = nlm(in, cfg);
        }
        return to_array(out);
      },
      py::arg("image"), py::arg("sigma") = 8.0, py::arg("h") = 0.0, py::arg("kappa") = 1.0,
      py::arg("patch_radius") = 2, py::arg("search_radius") = 10);

  m.def(
      "run_method",
      [](const std::string& method, const Array& img, const ParamMap& params) {
        const Image in = to_image(img);
        RunOutput r;
        {
          py::gil_scoped_release release;
          r = run_method(method_from_string(method), in, params);
        }
        return to_array(r.denoised);
      },
      py::arg("method"), py::arg("image"), py::arg("params"));

  m.def(
      "sweep",
      [](const Array& clean, const std::string& method, const ParamGrid& grid, const ParamMap& fixed,
         const std::vector<std::uint64_t>& seeds, double snr_target, unsigned jobs) {
        SweepSpec spec;
        spec.method = method_from_string(method);
        spec.grid = grid.empty() ? default_grid(spec.method) : grid;
        spec.fixed = fixed;
        spec.seeds = seeds;
        spec.snr = snr_target;
        const Image in = to_image(clean);
        std::vector<SweepRow> rows;
        {
          py::gil_scoped_release release;
          rows = run_sweep(in, spec, jobs);
        }
        py::list out;
        for (const auto& r : rows) {
          py::dict d = quality_dict({r.psnr, r.ncc, r.ssim});
          d["params"] = r.params;
          out.append(d);
        }
        return out;
      },
      py::arg("clean"), py::arg("method"), py::arg("grid") = ParamGrid{}, py::arg("fixed") = ParamMap{},
      py::arg("seeds") = std::vector<std::uint64_t>{0}, py::arg("snr") = 10.0, py::arg("jobs") = 1,
      "Rows sorted by descending PSNR; grid is a list of (name, values) pairs, empty for the default grid.");

  m.def("check_hypothesis",
        [](double a11, double a12, double a21, double a22) { return check_hypothesis({a11, a12, a21, a22}); });

  m.def(
      "solve_steady",
      [](const Array& g1, const Array& g2, double gamma1, double gamma2, double theta, double lam) {
        const Image a = to_image(g1), b = to_image(g2);
        if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, "sources differ in shape");
        SteadyProblem prob{{gamma1, gamma2}, a.data(), b.data()};
        SteadyResult r;
        {
          py::gil_scoped_release release;
          r = solve_steady(prob, DiffusionMatrix::rotation(theta), EdgeDetector::exponential(lam),
                           build_grid(a.width(), a.height()));
        }
        py::dict d;
        d["u1"] = nodal_to_array(r.state.u1, a.width(), a.height());
        d["u2"] = nodal_to_array(r.state.u2, a.width(), a.height());
        d["fp_iterations"] = r.fp_iterations;
        d["fp_residual"] = r.fp_residual;
        d["converged"] = r.converged;
        d["linf_lhs"] = r.linf_lhs;
        d["linf_rhs"] = r.linf_rhs;
        d["linf_bound_holds"] = r.linf_bound_holds;
        return d;
      },
      py::arg("g1"), py::arg("g2"), py::arg("gamma1") = 1.0, py::arg("gamma2") = 1.0,
      py::arg("theta") = std::numbers::pi / 30, py::arg("lam") = 0.15);
}
