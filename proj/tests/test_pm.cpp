#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "crossdiff/crossdiff.hpp"
#include "crossdiff/metrics.hpp"
#include "crossdiff/noise.hpp"
#include "crossdiff/pm.hpp"
#include "crossdiff/synthetic.hpp"
#include "support.hpp"

using namespace crossdiff;
using testing::error_of;

namespace {

long double total(const Image& img) {
  long double s = 0;
  for (double v : img.pixels()) s += v;
  return s;
}

Image shifted(const Image& img, double c) {
  Image out = img;
  for (double& v : out.pixels()) v += c;
  return out;
}

}  // namespace

TEST_CASE("denoise_pm_grad") {
  SUBCASE("constant image") {
    const Image img(10, 10, 12.0);
    const PmResult r = denoise_pm_grad(img, {});
    CHECK(testing::max_abs_diff(r.denoised.data(), img.data()) <= 1e-9);
  }
  SUBCASE("constant detector reproduces the theta = 0 heat flow") {
    const Image img = testing::random_image(16, 12, 3);
    PmConfig pm;
    pm.detector = EdgeDetector::constant(1.0);
    pm.t_final = 0.1;
    CdConfig cd;
    cd.theta = 0.0;
    cd.detector = EdgeDetector::constant(1.0);
    cd.t_final = 0.1;
    const Image a = denoise_pm_grad(img, pm).denoised;
    const Image b = denoise_cd(img, cd).denoised;
    CHECK(testing::max_abs_diff(a.data(), b.data()) <= 1e-10);
  }
  SUBCASE("mass conservation and shift invariance") {
    const Image img = testing::random_image(20, 20, 4);
    PmConfig cfg;
    cfg.t_final = 0.05;
    cfg.solver.rel_tol = 1e-14;
    const PmResult r = denoise_pm_grad(img, cfg);
    for (const auto& d : r.steps) CHECK(d.mass_drift <= 1e-8);
    const Image s = denoise_pm_grad(shifted(img, 10.0), cfg).denoised;
    CHECK(testing::max_abs_diff(s.data(), shifted(r.denoised, 10.0).data()) <= 1e-10);
  }
  SUBCASE("table regime improves a noisy synthetic image") {
    const Image clean = generate_synthetic(SyntheticKind::Shapes, 128, 1);
    const Image noisy = add_gaussian_noise(clean, {10.0, 1});
    PmConfig cfg;
    cfg.t_final = 0.3;
    cfg.detector = EdgeDetector::exponential(20.0);
    CHECK(psnr(clean, denoise_pm_grad(noisy, cfg).denoised) > psnr(clean, noisy));
  }
}

TEST_CASE("denoise_pm_lap") {
  SUBCASE("constant image") {
    const Image img(7, 9, -4.0);
    CHECK(denoise_pm_lap(img, {}).denoised == img);
  }
  SUBCASE("impulse with g = 1 is one five-point heat step") {
    Image img(5, 5, 0.0);
    img(2, 2) = 100.0;
    const double tau = 0.1;
    const Image out = pm_lap_step(img, EdgeDetector::constant(1.0), tau);
    Image expected(5, 5, 0.0);
    expected(2, 2) = 100.0 - 4 * tau * 100.0;
    expected(1, 2) = expected(3, 2) = expected(2, 1) = expected(2, 3) = tau * 100.0;
    CHECK(testing::max_abs_diff(out.data(), expected.data()) <= 1e-12);
  }
  SUBCASE("mass is conserved") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Image img = testing::random_image(17, 13, seed);
      PmConfig cfg;
      cfg.detector = EdgeDetector::exponential(10.0);
      cfg.t_final = 0.5;
      const Image out = denoise_pm_lap(img, cfg).denoised;
      CHECK(static_cast<double>(std::abs(total(out) - total(img)) / total(img)) <= 1e-10);
    }
  }
  SUBCASE("shift invariance and maximum principle") {
    const Image img = testing::random_image(16, 16, 5);
    PmConfig cfg;
    cfg.detector = EdgeDetector::rational(15.0);
    cfg.t_final = 1.0;
    cfg.tau = 0.25;
    const Image out = denoise_pm_lap(img, cfg).denoised;
    const Image s = denoise_pm_lap(shifted(img, 37.5), cfg).denoised;
    CHECK(testing::max_abs_diff(s.data(), shifted(out, 37.5).data()) <= 1e-10);
    const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
    for (double v : out.pixels()) {
      CHECK(v >= *lo);
      CHECK(v <= *hi);
    }
  }
  SUBCASE("stability bound and size") {
    PmConfig cfg;
    cfg.tau = 0.3;
    cfg.detector = EdgeDetector::exponential(10.0);
    CHECK(error_of([&] { denoise_pm_lap(testing::random_image(8, 8, 1), cfg); }) == ErrorCode::UnstableTimeStep);
    cfg.detector = EdgeDetector::constant(0.5);
    CHECK_NOTHROW(denoise_pm_lap(testing::random_image(8, 8, 1), cfg));
    CHECK(error_of([] { denoise_pm_lap(Image(2, 5, 1.0), {}); }) == ErrorCode::TooSmall);
  }
  SUBCASE("table regime improves a noisy synthetic image") {
    const Image clean = generate_synthetic(SyntheticKind::Shapes, 128, 1);
    const Image noisy = add_gaussian_noise(clean, {10.0, 1});
    PmConfig cfg;
    cfg.t_final = 0.8;
    cfg.detector = EdgeDetector::exponential(10.0);
    CHECK(psnr(clean, denoise_pm_lap(noisy, cfg).denoised) > psnr(clean, noisy));
  }
}

TEST_CASE("five_point_laplacian") {
  Image lin(6, 5);
  for (std::size_t y = 0; y < 5; ++y)
    for (std::size_t x = 0; x < 6; ++x) lin(x, y) = 3.0 * x + 2.0 * y;
  const Image lap = five_point_laplacian(lin);
  for (std::size_t y = 1; y < 4; ++y)
    for (std::size_t x = 1; x < 5; ++x) CHECK(lap(x, y) == doctest::Approx(0.0));
  // Replicated edge: the missing neighbour equals the boundary pixel.
  CHECK(lap(0, 2) == doctest::Approx(3.0));
  CHECK(lap(5, 2) == doctest::Approx(-3.0));
  CHECK(lap(2, 0) == doctest::Approx(2.0));
  Image quad(7, 7);
  for (std::size_t y = 0; y < 7; ++y)
    for (std::size_t x = 0; x < 7; ++x) quad(x, y) = double(x * x + y * y);
  CHECK(five_point_laplacian(quad)(3, 3) == doctest::Approx(4.0));
}
