#include "crossdiff/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crossdiff/error.hpp"

namespace crossdiff {

namespace {

constexpr double kPeak = 255.0;
constexpr double kC1 = (0.01 * kPeak) * (0.01 * kPeak);
constexpr double kC2 = (0.03 * kPeak) * (0.03 * kPeak);

void require_same_shape(const Image& a, const Image& b, const char* op) {
  if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": image shapes differ");
}

}  // namespace

double snr(const Image& clean, const Image& noisy) {
  require_same_shape(clean, noisy, "snr");
  std::vector<double> diff(clean.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = clean[i] - noisy[i];
  const double sigma_diff = stddev(diff);
  // A constant offset leaves only rounding noise in the difference.
  double scale = 0.0;
  for (double d : diff) scale = std::max(scale, std::abs(d));
  if (sigma_diff <= 1e-12 * scale || sigma_diff == 0.0) throw Error(ErrorCode::ZeroDenominator, "snr: difference image is constant");
  return stddev(clean.pixels()) / sigma_diff;
}

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  if (sq == 0.0) return std::numeric_limits<double>::infinity();
  const double rmse = std::sqrt(sq / static_cast<double>(a.size()));
  return 20.0 * std::log10(kPeak / rmse);
}

double ncc(const Image& a, const Image& b) {
  require_same_shape(a, b, "ncc");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw Error(ErrorCode::ZeroNorm, "ncc: zero-norm image");
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b, "ssim");
  const double n = static_cast<double>(a.size());
  const double mu_a = mean(a.pixels());
  const double mu_b = mean(b.pixels());
  double var_a = 0.0, var_b = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mu_a;
    const double db = b[i] - mu_b;
    var_a += da * da;
    var_b += db * db;
    cov += da * db;
  }
  var_a /= n;
  var_b /= n;
  cov /= n;
  const double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
  const double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
  return num / den;
}

QualityReport quality(const Image& reference, const Image& test) {
  return {psnr(reference, test), ncc(reference, test), ssim(reference, test)};
}

}  // namespace crossdiff
