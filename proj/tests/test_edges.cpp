#include <gtest/gtest.h>

#include <random>

#include "lanepilot/edges.hpp"
#include "lanepilot/errors.hpp"
#include "oracles.hpp"

using namespace lanepilot;
using namespace lanepilot::edges;
using imaging::BinaryMask;
using imaging::Frame;

namespace {

Frame vertical_step(int w, int h, int c) {
  Frame f(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = c + 1; x < w; ++x) f.at(x, y) = 255;
  return f;
}

Frame transpose(const Frame& f) {
  Frame t(f.height(), f.width(), 1);
  for (int y = 0; y < f.height(); ++y)
    for (int x = 0; x < f.width(); ++x) t.at(y, x) = f.at(x, y);
  return t;
}

// 8-connected components of the mask.
std::vector<std::vector<std::pair<int, int>>> components(const BinaryMask& m) {
  std::vector<std::vector<std::pair<int, int>>> out;
  BinaryMask seen(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m.test(x, y) || seen.test(x, y)) continue;
      out.emplace_back();
      std::vector<std::pair<int, int>> stack{{x, y}};
      seen.set(x, y);
      while (!stack.empty()) {
        auto [px, py] = stack.back();
        stack.pop_back();
        out.back().push_back({px, py});
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx, ny = py + dy;
            if (nx < 0 || ny < 0 || nx >= m.width() || ny >= m.height()) continue;
            if (m.test(nx, ny) && !seen.test(nx, ny)) {
              seen.set(nx, ny);
              stack.push_back({nx, ny});
            }
          }
      }
    }
  return out;
}

}  // namespace

TEST(Sobel, UniformIsZero) {
  const GradientField g = sobel_gradients(Frame(10, 7, 1, std::uint8_t{90}));
  for (std::size_t i = 0; i < g.gx.size(); ++i) {
    EXPECT_EQ(g.gx[i], 0);
    EXPECT_EQ(g.gy[i], 0);
    EXPECT_EQ(g.magnitude[i], 0);
  }
}

TEST(Sobel, VerticalStep) {
  const GradientField g = sobel_gradients(vertical_step(12, 8, 5));
  for (int y = 0; y < 8; ++y) {
    EXPECT_EQ(g.gx[g.index(5, y)], 1020);
    EXPECT_EQ(g.gx[g.index(6, y)], 1020);
    EXPECT_EQ(g.gx[g.index(3, y)], 0);
    EXPECT_EQ(g.gy[g.index(5, y)], 0);
    EXPECT_EQ(g.magnitude[g.index(6, y)], 1020);
  }
}

TEST(Sobel, TransposeSwapsComponents) {
  std::mt19937 rng(21);
  const Frame f = oracle::random_gray(rng, 13, 9);
  const GradientField a = sobel_gradients(f);
  const GradientField b = sobel_gradients(transpose(f));
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 13; ++x) {
      EXPECT_EQ(a.gx[a.index(x, y)], b.gy[b.index(y, x)]);
      EXPECT_EQ(a.gy[a.index(x, y)], b.gx[b.index(y, x)]);
    }
}

TEST(Sobel, MagnitudeIsRoundedNorm) {
  std::mt19937 rng(22);
  const GradientField g = sobel_gradients(oracle::random_gray(rng, 20, 20));
  for (std::size_t i = 0; i < g.gx.size(); ++i) {
    EXPECT_LE(std::abs(g.gx[i]), 1020);
    EXPECT_LE(std::abs(g.gy[i]), 1020);
    EXPECT_EQ(g.magnitude[i], std::lround(std::hypot(g.gx[i], g.gy[i])));
  }
}

TEST(Sobel, TooSmall) {
  EXPECT_THROW(sobel_gradients(Frame(2, 5, 1)), DegenerateInput);
}

TEST(Direction, Bins) {
  EXPECT_EQ(quantize_direction(10, 0), Direction::k0);
  EXPECT_EQ(quantize_direction(-10, 3), Direction::k0);
  EXPECT_EQ(quantize_direction(0, 7), Direction::k90);
  EXPECT_EQ(quantize_direction(5, 5), Direction::k45);
  EXPECT_EQ(quantize_direction(-5, -5), Direction::k45);
  EXPECT_EQ(quantize_direction(5, -5), Direction::k135);
  // Either side of 22.5 degrees.
  EXPECT_EQ(quantize_direction(1000, 414), Direction::k0);
  EXPECT_EQ(quantize_direction(1000, 415), Direction::k45);
}

TEST(Canny, ConstantImageIsEmpty) {
  EXPECT_EQ(canny(Frame(16, 16, 1, std::uint8_t{128}), 50, 150).count(), 0u);
}

TEST(Canny, StepGivesSingleThinChain) {
  const BinaryMask e = canny(vertical_step(32, 32, 15), 50, 150);
  for (int y = 1; y < 31; ++y) {
    int count = 0;
    for (int x = 0; x < 32; ++x) count += e.test(x, y);
    EXPECT_EQ(count, 1) << "row " << y;
    EXPECT_TRUE(e.test(15, y));
  }
  EXPECT_EQ(e, oracle::canny(vertical_step(32, 32, 15), 50, 150));
}

TEST(Canny, AllBelowLowIsEmpty) {
  Frame f(16, 16, 1);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) f.at(x, y) = static_cast<std::uint8_t>(x);
  // Ramp of 1 per column gives magnitude 8.
  EXPECT_EQ(canny(f, 9, 9).count(), 0u);
  EXPECT_EQ(canny(f, 9, 255).count(), 0u);
}

TEST(Canny, Preconditions) {
  const Frame f(8, 8, 1);
  EXPECT_THROW(canny(f, 0, 10), ContractViolation);
  EXPECT_THROW(canny(f, 20, 10), ContractViolation);
}

TEST(Canny, MatchesReferenceOnRandomImages) {
  std::mt19937 rng(2024);
  for (int i = 0; i < 200; ++i) {
    Frame f = oracle::random_blocks(rng, 64, 64);
    if (i % 2) f = oracle::blur_2d(f, 2, 1.4);
    ASSERT_EQ(canny(f, 50, 150), oracle::canny(f, 50, 150)) << "image " << i;
  }
}

TEST(Canny, MatchesReferenceOnNoise) {
  std::mt19937 rng(7);
  for (int i = 0; i < 20; ++i) {
    const Frame f = oracle::random_gray(rng, 32, 32);
    ASSERT_EQ(canny(f, 100, 400), oracle::canny(f, 100, 400));
  }
}

TEST(Canny, ThresholdAndSeedInvariants) {
  std::mt19937 rng(31);
  for (int i = 0; i < 30; ++i) {
    const Frame f = oracle::random_blocks(rng, 48, 48);
    const GradientField g = sobel_gradients(f);
    const BinaryMask thin = non_maximum_suppression(g);
    const BinaryMask e = canny(f, 60, 200);
    for (int y = 0; y < 48; ++y)
      for (int x = 0; x < 48; ++x) {
        if (!e.test(x, y)) continue;
        EXPECT_GE(g.magnitude[g.index(x, y)], 60);
        EXPECT_TRUE(thin.test(x, y));
      }
    for (const auto& comp : components(e)) {
      bool strong = false;
      for (auto [x, y] : comp) strong |= g.magnitude[g.index(x, y)] >= 200;
      EXPECT_TRUE(strong);
    }
  }
}

TEST(Canny, MirrorEquivariant) {
  std::mt19937 rng(41);
  for (int i = 0; i < 30; ++i) {
    const Frame f = oracle::random_blocks(rng, 40, 30);
    EXPECT_EQ(canny(imaging::mirror_horizontal(f), 50, 150),
              imaging::mirror_horizontal(canny(f, 50, 150)));
  }
}

TEST(Canny, RaisingLowNeverAddsEdges) {
  std::mt19937 rng(51);
  for (int i = 0; i < 20; ++i) {
    const Frame f = oracle::random_blocks(rng, 40, 40);
    BinaryMask prev = canny(f, 10, 300);
    for (int low = 40; low <= 300; low += 30) {
      const BinaryMask cur = canny(f, low, 300);
      for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x)
          if (cur.test(x, y)) EXPECT_TRUE(prev.test(x, y));
      prev = cur;
    }
  }
}

TEST(Magnitude, DebugImage) {
  const Frame m = magnitude_image(sobel_gradients(vertical_step(8, 4, 3)));
  EXPECT_EQ(m.at(3, 1), 255);
  EXPECT_EQ(m.at(0, 1), 0);
}
