#include "lanepilot/edges.hpp"

#include <algorithm>
#include <cmath>

#include "lanepilot/errors.hpp"

namespace lanepilot::edges {

namespace {

// tan(22.5 deg) and tan(67.5 deg). For integer gradients bounded by 1020 no
// ratio |gy|/|gx| comes within float rounding of these, so the comparison
// matches an atan2-based classification exactly.
constexpr double kTan22 = 0.41421356237309503;
constexpr double kTan67 = 2.4142135623730949;

struct Step {
  int dx;
  int dy;
};

// Unit step toward the signed gradient, restricted to the quantized bin.
Step ahead_step(Direction dir, int gx, int gy) {
  const int sx = (gx > 0) - (gx < 0);
  const int sy = (gy > 0) - (gy < 0);
  switch (dir) {
    case Direction::k0:
      return {sx, 0};
    case Direction::k90:
      return {0, sy};
    case Direction::k45:
    case Direction::k135:
      return {sx, sy};
  }
  return {0, 0};
}

}  // namespace

Direction quantize_direction(int gx, int gy) {
  const double ax = std::abs(gx);
  const double ay = std::abs(gy);
  if (ay < kTan22 * ax) return Direction::k0;
  if (ay > kTan67 * ax) return Direction::k90;
  // Same signs point into quadrants I/III (45 deg bin) with y down.
  return ((gx > 0) == (gy > 0)) ? Direction::k45 : Direction::k135;
}

GradientField sobel_gradients(const imaging::Frame& gray) {
  if (gray.channels() != 1) {
    throw ContractViolation("sobel_gradients: expected a 1-channel frame");
  }
  if (gray.width() < 3 || gray.height() < 3) {
    throw DegenerateInput("sobel_gradients: image smaller than 3x3");
  }
  const int w = gray.width();
  const int h = gray.height();
  GradientField field;
  field.width = w;
  field.height = h;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  field.gx.resize(n);
  field.gy.resize(n);
  field.magnitude.resize(n);

  for (int y = 0; y < h; ++y) {
    const auto up = gray.row(std::max(y - 1, 0));
    const auto mid = gray.row(y);
    const auto down = gray.row(std::min(y + 1, h - 1));
    for (int x = 0; x < w; ++x) {
      const int xl = std::max(x - 1, 0);
      const int xr = std::min(x + 1, w - 1);
      const int gx = (up[xr] + 2 * mid[xr] + down[xr]) -
                     (up[xl] + 2 * mid[xl] + down[xl]);
      const int gy = (down[xl] + 2 * down[x] + down[xr]) -
                     (up[xl] + 2 * up[x] + up[xr]);
      const std::size_t i = field.index(x, y);
      field.gx[i] = static_cast<std::int16_t>(gx);
      field.gy[i] = static_cast<std::int16_t>(gy);
      field.magnitude[i] = static_cast<std::uint16_t>(
          std::lround(std::sqrt(static_cast<double>(gx * gx + gy * gy))));
    }
  }
  return field;
}

imaging::BinaryMask non_maximum_suppression(const GradientField& field) {
  const int w = field.width;
  const int h = field.height;
  imaging::BinaryMask keep(w, h);
  auto magnitude_at = [&](int x, int y) -> int {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0;
    return field.magnitude[field.index(x, y)];
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = field.index(x, y);
      const int m = field.magnitude[i];
      if (m == 0) continue;
      const int gx = field.gx[i];
      const int gy = field.gy[i];
      const Step s = ahead_step(quantize_direction(gx, gy), gx, gy);
      if (m > magnitude_at(x - s.dx, y - s.dy) &&
          m >= magnitude_at(x + s.dx, y + s.dy)) {
        keep.set(x, y);
      }
    }
  }
  return keep;
}

imaging::BinaryMask canny(const imaging::Frame& gray, int low, int high) {
  if (low <= 0 || low > high) {
    throw ContractViolation("canny: need 0 < low <= high");
  }
  const GradientField field = sobel_gradients(gray);
  const imaging::BinaryMask thin = non_maximum_suppression(field);
  const int w = field.width;
  const int h = field.height;

  imaging::BinaryMask edges(w, h);
  std::vector<int> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!thin.test(x, y) || edges.test(x, y) ||
          field.magnitude[field.index(x, y)] < high) {
        continue;
      }
      // Flood fill from this seed through weak-or-better NMS survivors.
      edges.set(x, y);
      stack.push_back(static_cast<int>(field.index(x, y)));
      while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        const int px = p % w;
        const int py = p / w;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx;
            const int ny = py + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (edges.test(nx, ny) || !thin.test(nx, ny)) continue;
            if (field.magnitude[field.index(nx, ny)] < low) continue;
            edges.set(nx, ny);
            stack.push_back(static_cast<int>(field.index(nx, ny)));
          }
        }
      }
    }
  }
  return edges;
}

imaging::Frame magnitude_image(const GradientField& field) {
  imaging::Frame out(field.width, field.height, 1);
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = static_cast<std::uint8_t>(
        std::min<int>(255, field.magnitude[i] / 4));
  }
  return out;
}

}  // namespace lanepilot::edges
