#pragma once

#include "crossdiff/image.hpp"

namespace crossdiff {

struct QualityReport {
  double psnr = 0.0;
  double ncc = 0.0;
  double ssim = 0.0;
};

/// sigma(clean) / sigma(clean - noisy), population standard deviations.
double snr(const Image& clean, const Image& noisy);

/// 20 log10(255 / rmse). Returns +infinity for identical images.
double psnr(const Image& a, const Image& b);

/// Raw normalized inner product <a,b> / (|a| |b|); no mean removal.
double ncc(const Image& a, const Image& b);

/// Single-window SSIM over the whole image with c1 = (0.01*255)^2,
/// c2 = (0.03*255)^2.
double ssim(const Image& a, const Image& b);

QualityReport quality(const Image& reference, const Image& test);

}  // namespace crossdiff
