#include "lanepilot/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "lanepilot/errors.hpp"

namespace lanepilot::imaging {

namespace {

void check_dims(int width, int height, int channels) {
  if (width <= 0 || height <= 0) {
    throw ContractViolation("frame dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    throw ContractViolation("frame must have 1 or 3 channels");
  }
}

void require_gray(const Frame& frame, const char* op) {
  if (frame.channels() != 1) {
    throw ContractViolation(std::string(op) + ": expected a 1-channel frame");
  }
}

// Cursor over a PNM header. Comments ('#' to end of line) count as whitespace.
class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_number(const char* field) {
    skip_space();
    if (pos_ >= bytes_.size()) {
      throw ParseError(ParseErrorKind::kMalformedHeader,
                       std::string("header ends before ") + field);
    }
    if (!std::isdigit(bytes_[pos_])) {
      throw ParseError(ParseErrorKind::kMalformedHeader,
                       std::string("non-numeric ") + field);
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) {
        throw ParseError(ParseErrorKind::kMalformedHeader,
                         std::string(field) + " out of range");
      }
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void expect_single_space() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw ParseError(ParseErrorKind::kMalformedHeader,
                       "missing whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }
  void advance(std::size_t n) noexcept { pos_ += n; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Frame::Frame(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_dims(width, height, channels);
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Frame::Frame(int width, int height, int channels,
             std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels),
      data_(std::move(data)) {
  check_dims(width, height, channels);
  if (data_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw ContractViolation("frame data length does not match dimensions");
  }
}

std::size_t BinaryMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

Frame decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' ||
      (bytes[1] != '5' && bytes[1] != '6')) {
    throw ParseError(ParseErrorKind::kMalformedHeader,
                     "expected P5 or P6 magic");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader reader(bytes);
  reader.advance(2);
  if (reader.position() >= bytes.size() || !std::isspace(bytes[2])) {
    throw ParseError(ParseErrorKind::kMalformedHeader,
                     "missing whitespace after magic");
  }
  const long width = reader.read_number("width");
  const long height = reader.read_number("height");
  const long maxval = reader.read_number("maxval");
  if (width == 0 || height == 0) {
    throw ParseError(ParseErrorKind::kMalformedHeader, "zero dimension");
  }
  if (maxval != 255) {
    throw ParseError(ParseErrorKind::kUnsupportedMaxval,
                     "maxval " + std::to_string(maxval) + " is not 255");
  }
  reader.expect_single_space();

  const std::size_t expected =
      static_cast<std::size_t>(width) * height * channels;
  const std::size_t available = bytes.size() - reader.position();
  if (available < expected) {
    throw ParseError(ParseErrorKind::kTruncatedPayload,
                     "payload has " + std::to_string(available) +
                         " bytes, expected " + std::to_string(expected));
  }
  const auto* first = bytes.data() + reader.position();
  return Frame(static_cast<int>(width), static_cast<int>(height), channels,
               std::vector<std::uint8_t>(first, first + expected));
}

std::vector<std::uint8_t> encode_image(const Frame& frame) {
  const std::string header = std::string(frame.channels() == 1 ? "P5" : "P6") +
                             "\n" + std::to_string(frame.width()) + " " +
                             std::to_string(frame.height()) + "\n255\n";
  std::vector<std::uint8_t> out;
  out.reserve(header.size() + frame.data().size());
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), frame.data().begin(), frame.data().end());
  return out;
}

Frame read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_image(bytes);
}

void write_image(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  const auto bytes = encode_image(frame);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("short write to " + path.string());
  }
}

Frame to_grayscale(const Frame& rgb) {
  if (rgb.channels() != 3) {
    throw ContractViolation("to_grayscale: expected a 3-channel frame");
  }
  Frame gray(rgb.width(), rgb.height(), 1);
  const auto src = rgb.data();
  auto dst = gray.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    // Integer Rec.601 weights in thousandths, +500 rounds half up.
    const int r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    dst[i] = static_cast<std::uint8_t>(
        std::min(255, (299 * r + 587 * g + 114 * b + 500) / 1000));
  }
  return gray;
}

Frame crop_bottom_half(const Frame& frame) {
  if (frame.height() < 2) {
    throw DegenerateInput("crop_bottom_half: height must be at least 2");
  }
  const int out_height = (frame.height() + 1) / 2;
  const int first_row = frame.height() - out_height;
  const auto src = frame.data();
  const std::size_t row_bytes =
      static_cast<std::size_t>(frame.width()) * frame.channels();
  std::vector<std::uint8_t> data(
      src.begin() + static_cast<std::ptrdiff_t>(first_row * row_bytes),
      src.end());
  return Frame(frame.width(), out_height, frame.channels(), std::move(data));
}

BinaryMask band_threshold(const Frame& gray, int lo, int hi) {
  require_gray(gray, "band_threshold");
  if (lo > hi || lo < 0 || hi > 255) {
    throw ContractViolation("band_threshold: need 0 <= lo <= hi <= 255");
  }
  BinaryMask mask(gray.width(), gray.height());
  for (int y = 0; y < gray.height(); ++y) {
    const auto row = gray.row(y);
    for (int x = 0; x < gray.width(); ++x) {
      if (row[x] >= lo && row[x] <= hi) mask.set(x, y);
    }
  }
  return mask;
}

Frame apply_mask(const Frame& gray, const BinaryMask& mask) {
  require_gray(gray, "apply_mask");
  if (mask.width() != gray.width() || mask.height() != gray.height()) {
    throw ContractViolation("apply_mask: mask dimensions differ from frame");
  }
  Frame out(gray.width(), gray.height(), 1);
  const auto src = gray.data();
  const auto bits = mask.bits();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = bits[i] ? src[i] : 0;
  }
  return out;
}

std::vector<double> gaussian_kernel(int radius, double sigma) {
  if (radius < 1) {
    throw ContractViolation("gaussian kernel radius must be >= 1");
  }
  if (!(sigma > 0.0)) {
    throw ContractViolation("gaussian kernel sigma must be positive");
  }
  std::vector<double> kernel(2 * static_cast<std::size_t>(radius) + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
    kernel[i + radius] = w;
    sum += w;
  }
  for (auto& w : kernel) w /= sum;
  return kernel;
}

Frame gaussian_blur(const Frame& gray, int radius, double sigma) {
  require_gray(gray, "gaussian_blur");
  const auto kernel = gaussian_kernel(radius, sigma);
  const int w = gray.width();
  const int h = gray.height();

  // Horizontal pass keeps full precision; rounding happens once at the end.
  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const auto row = gray.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int xx = std::clamp(x + k, 0, w - 1);
        acc += kernel[k + radius] * row[xx];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }

  Frame out(w, h, 1);
  for (int y = 0; y < h; ++y) {
    auto dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int yy = std::clamp(y + k, 0, h - 1);
        acc += kernel[k + radius] * tmp[static_cast<std::size_t>(yy) * w + x];
      }
      dst[x] = static_cast<std::uint8_t>(
          std::clamp(std::lround(acc), 0L, 255L));
    }
  }
  return out;
}

Frame mirror_horizontal(const Frame& frame) {
  Frame out = frame;
  const int c = frame.channels();
  for (int y = 0; y < frame.height(); ++y) {
    const auto src = frame.row(y);
    auto dst = out.row(y);
    for (int x = 0; x < frame.width(); ++x) {
      const int mx = frame.width() - 1 - x;
      for (int k = 0; k < c; ++k) dst[mx * c + k] = src[x * c + k];
    }
  }
  return out;
}

BinaryMask mirror_horizontal(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      out.set(mask.width() - 1 - x, y, mask.test(x, y));
    }
  }
  return out;
}

Frame mask_to_frame(const BinaryMask& mask) {
  Frame out(mask.width(), mask.height(), 1);
  const auto bits = mask.bits();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = bits[i] ? 255 : 0;
  return out;
}

}  // namespace lanepilot::imaging
