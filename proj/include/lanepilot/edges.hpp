#pragma once

#include <cstdint>
#include <vector>

#include "lanepilot/imaging.hpp"

namespace lanepilot::edges {

// Sobel responses of an 8-bit image; |gx|, |gy| <= 1020.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<std::int16_t> gx;
  std::vector<std::int16_t> gy;
  std::vector<std::uint16_t> magnitude;  // round(sqrt(gx^2 + gy^2))

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
};

// Quantized gradient orientation, folded to [0, 180) degrees.
enum class Direction : std::uint8_t { k0, k45, k90, k135 };

Direction quantize_direction(int gx, int gy);

// 3x3 Sobel, +y pointing down, border pixels by edge replication.
// Throws DegenerateInput for images smaller than 3x3.
GradientField sobel_gradients(const imaging::Frame& gray);

// Non-maximum suppression along the quantized gradient. A pixel survives
// when its magnitude is strictly greater than the neighbor behind it and
// at least the neighbor ahead of it (ahead = the signed gradient direction).
// Pixels outside the image count as magnitude 0.
imaging::BinaryMask non_maximum_suppression(const GradientField& field);

// Canny on an already blurred image: Sobel, NMS, then 8-connected
// hysteresis seeded by magnitude >= high and extended through >= low.
imaging::BinaryMask canny(const imaging::Frame& gray, int low, int high);

// Gradient magnitude scaled into [0, 255] for debug dumps.
imaging::Frame magnitude_image(const GradientField& field);

}  // namespace lanepilot::edges
