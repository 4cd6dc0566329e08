#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lanepilot::imaging {

// Row-major 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, int channels, std::uint8_t fill = 0);
  Frame(int width, int height, int channels, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<std::uint8_t> row(int y) {
    return {data_.data() + static_cast<std::size_t>(y) * width_ * channels_,
            static_cast<std::size_t>(width_) * channels_};
  }
  std::span<const std::uint8_t> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_ * channels_,
            static_cast<std::size_t>(width_) * channels_};
  }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

// One boolean per pixel, row-major.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool fill = false)
      : width_(width), height_(height),
        bits_(static_cast<std::size_t>(width) * height, fill ? 1 : 0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool test(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  void set(int x, int y, bool value = true) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
  }

  std::size_t count() const noexcept;

  // Raw storage, 0 or 1 per pixel.
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Binary PGM (P5) / PPM (P6), maxval 255. Throws ParseError.
Frame decode_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_image(const Frame& frame);

// File helpers; IO failures throw IoError, format failures ParseError.
Frame read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Frame& frame);

// Rec.601 luma, rounded half away from zero.
Frame to_grayscale(const Frame& rgb);

// Keeps the lower ceil(h/2) rows.
Frame crop_bottom_half(const Frame& frame);

// Set iff lo <= pixel <= hi.
BinaryMask band_threshold(const Frame& gray, int lo, int hi);

// Gray pixels where the mask is set, zero elsewhere.
Frame apply_mask(const Frame& gray, const BinaryMask& mask);

// Normalized 1-D kernel of 2*radius+1 taps, w(i) ~ exp(-i^2 / (2 sigma^2)).
std::vector<double> gaussian_kernel(int radius, double sigma);

// Separable blur with edge replication; output rounded to nearest.
Frame gaussian_blur(const Frame& gray, int radius, double sigma);

Frame mirror_horizontal(const Frame& frame);
BinaryMask mirror_horizontal(const BinaryMask& mask);

// 0/255 gray frame for dumping masks.
Frame mask_to_frame(const BinaryMask& mask);

}  // namespace lanepilot::imaging
