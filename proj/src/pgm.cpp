#include "crossdiff/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "crossdiff/error.hpp"

namespace crossdiff {

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  // Header integers: a missing or non-numeric token is a header error.
  unsigned long header_uint(const char* what) {
    skip_space_and_comments();
    unsigned long value = 0;
    if (!read_digits(value)) throw Error(ErrorCode::MalformedHeader, std::string("expected ") + what);
    return value;
  }

  // P2 samples: running out of tokens means the data is truncated.
  unsigned long sample_uint() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) throw Error(ErrorCode::TruncatedData, "not enough ASCII samples");
    unsigned long value = 0;
    if (!read_digits(value)) throw Error(ErrorCode::MalformedHeader, "non-numeric ASCII sample");
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t byte_at(std::size_t i) const { return bytes_[i]; }

 private:
  bool read_digits(unsigned long& value) {
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000UL) return false;
      ++pos_;
    }
    return pos_ > start;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image load_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw Error(ErrorCode::MalformedHeader, "magic number must be P2 or P5");
  }
  const bool binary = bytes[1] == '5';
  Reader in(bytes);
  in.advance(2);
  const auto width = in.header_uint("width");
  const auto height = in.header_uint("height");
  const auto maxval = in.header_uint("maxval");
  if (width == 0 || height == 0) throw Error(ErrorCode::MalformedHeader, "zero image dimension");
  if (maxval == 0 || maxval > 65535) {
    throw Error(ErrorCode::UnsupportedMaxval, "maxval " + std::to_string(maxval));
  }

  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<double> pixels(count);
  if (binary) {
    // Exactly one whitespace byte separates maxval from the raster.
    if (in.remaining() == 0 || !std::isspace(in.byte_at(in.pos()))) {
      throw Error(ErrorCode::MalformedHeader, "missing separator before raster");
    }
    in.advance(1);
    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    if (in.remaining() < count * bytes_per_sample) {
      throw Error(ErrorCode::TruncatedData, "raster needs " + std::to_string(count * bytes_per_sample) +
                                                " bytes, have " + std::to_string(in.remaining()));
    }
    const std::size_t base = in.pos();
    for (std::size_t i = 0; i < count; ++i) {
      unsigned v = 0;
      if (bytes_per_sample == 1) {
        v = in.byte_at(base + i);
      } else {
        v = (static_cast<unsigned>(in.byte_at(base + 2 * i)) << 8) | in.byte_at(base + 2 * i + 1);
      }
      pixels[i] = static_cast<double>(v);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) pixels[i] = static_cast<double>(in.sample_uint());
  }
  return Image(width, height, std::move(pixels));
}

std::vector<std::uint8_t> save_pgm(const Image& img, bool binary) {
  const std::string header = std::string(binary ? "P5" : "P2") + "\n" + std::to_string(img.width()) +
                             " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  auto quantize = [](double v) {
    return static_cast<unsigned>(std::clamp(std::round(v), 0.0, 255.0));
  };
  if (binary) {
    out.reserve(out.size() + img.size());
    for (double v : img.pixels()) out.push_back(static_cast<std::uint8_t>(quantize(v)));
  } else {
    for (std::size_t y = 0; y < img.height(); ++y) {
      for (std::size_t x = 0; x < img.width(); ++x) {
        const std::string token = std::to_string(quantize(img(x, y)));
        out.insert(out.end(), token.begin(), token.end());
        out.push_back(x + 1 == img.width() ? '\n' : ' ');
      }
    }
  }
  return out;
}

Image read_pgm_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  return load_pgm(bytes);
}

void write_pgm_file(const std::filesystem::path& path, const Image& img, bool binary) {
  const auto bytes = save_pgm(img, binary);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace crossdiff
