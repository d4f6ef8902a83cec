#include "crossdiff/noise.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "crossdiff/error.hpp"

namespace crossdiff {

namespace {

// Box-Muller over mt19937_64, whose output sequence is fixed by the
// standard, so a seed gives the same noise on every platform.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

double noise_sigma(const Image& img, const NoiseSpec& spec) {
  if (!(spec.target_snr > 0.0) || !std::isfinite(spec.target_snr)) {
    throw Error(ErrorCode::InvalidArgument, "target SNR must be positive");
  }
  const double sigma = stddev(img.pixels());
  if (sigma == 0.0) throw Error(ErrorCode::ConstantImage, "SNR is undefined for a constant image");
  return sigma / spec.target_snr;
}

Image add_gaussian_noise(const Image& img, const NoiseSpec& spec) {
  const double sigma_n = noise_sigma(img, spec);
  GaussianStream gauss(spec.seed);
  Image out = img;
  for (double& v : out.pixels()) v += sigma_n * gauss.next();
  return out;
}

}  // namespace crossdiff
