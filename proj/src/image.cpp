#include "crossdiff/image.hpp"

#include <cmath>
#include <string>

#include "crossdiff/error.hpp"

namespace crossdiff {

namespace {

void check_values(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "image pixels must be finite");
  }
}

}  // namespace

Image::Image(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), pixels_(width * height, fill) {
  if (width == 0 || height == 0) throw Error(ErrorCode::BadDimensions, "image must be at least 1x1");
  check_values(pixels_);
}

Image::Image(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) throw Error(ErrorCode::BadDimensions, "image must be at least 1x1");
  if (pixels_.size() != width * height) {
    throw Error(ErrorCode::BadDimensions,
                "pixel count " + std::to_string(pixels_.size()) + " does not match " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  check_values(pixels_);
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mu = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - mu) * (v - mu);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

Image flip_horizontal(const Image& img) {
  Image out(img.width(), img.height());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) out(img.width() - 1 - x, y) = img(x, y);
  return out;
}

Image flip_vertical(const Image& img) {
  Image out(img.width(), img.height());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) out(x, img.height() - 1 - y) = img(x, y);
  return out;
}

}  // namespace crossdiff
