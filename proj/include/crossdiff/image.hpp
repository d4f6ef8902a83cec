#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace crossdiff {

/// Grayscale intensity grid stored row-major. Values are nominally in
/// [0, 255] but nothing clamps them in memory; noisy and filtered images may
/// leave that range.
class Image {
 public:
  Image() = default;
  Image(std::size_t width, std::size_t height, double fill = 0.0);
  Image(std::size_t width, std::size_t height, std::vector<double> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  double& operator()(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }
  double operator()(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  double& operator[](std::size_t i) { return pixels_[i]; }
  double operator[](std::size_t i) const { return pixels_[i]; }

  std::span<double> pixels() noexcept { return pixels_; }
  std::span<const double> pixels() const noexcept { return pixels_; }
  const std::vector<double>& data() const noexcept { return pixels_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const Image&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> pixels_;
};

double mean(std::span<const double> values);
/// Population standard deviation (divides by N).
double stddev(std::span<const double> values);

Image flip_horizontal(const Image& img);
Image flip_vertical(const Image& img);

}  // namespace crossdiff
