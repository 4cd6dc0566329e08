#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>

#include "lanepilot/errors.hpp"
#include "lanepilot/imaging.hpp"
#include "oracles.hpp"

using namespace lanepilot;
using namespace lanepilot::imaging;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& header,
                                   std::initializer_list<int> payload = {}) {
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (int v : payload) out.push_back(static_cast<std::uint8_t>(v));
  return out;
}

ParseErrorKind parse_kind(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_image(bytes);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a parse error";
  return ParseErrorKind::kMalformedHeader;
}

Frame random_rgb(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> d(0, 255);
  Frame f(w, h, 3);
  for (auto& v : f.data()) v = static_cast<std::uint8_t>(d(rng));
  return f;
}

std::pair<int, int> min_max(const Frame& f) {
  const auto [lo, hi] = std::minmax_element(f.data().begin(), f.data().end());
  return {*lo, *hi};
}

}  // namespace

TEST(Decode, MinimalGrayHeader) {
  const Frame f = decode_image(bytes_of("P5 1 1 255\n", {0x7F}));
  EXPECT_EQ(f.width(), 1);
  EXPECT_EQ(f.height(), 1);
  EXPECT_EQ(f.channels(), 1);
  EXPECT_EQ(f.at(0, 0), 127);
}

TEST(Decode, CommentsInHeader) {
  const Frame f =
      decode_image(bytes_of("P6\n# made by hand\n1 1\n# depth\n255\n", {1, 2, 3}));
  EXPECT_EQ(f.channels(), 3);
  EXPECT_EQ(f.at(0, 0, 2), 3);
}

TEST(Decode, TruncatedPayload) {
  std::vector<std::uint8_t> bytes = bytes_of("P5\n4 4\n255\n");
  bytes.resize(bytes.size() + 15, 9);
  EXPECT_EQ(parse_kind(bytes), ParseErrorKind::kTruncatedPayload);
}

TEST(Decode, UnsupportedMaxval) {
  EXPECT_EQ(parse_kind(bytes_of("P5\n1 1\n65535\n", {0, 0})),
            ParseErrorKind::kUnsupportedMaxval);
  EXPECT_EQ(parse_kind(bytes_of("P5\n1 1\n15\n", {0})),
            ParseErrorKind::kUnsupportedMaxval);
}

TEST(Decode, MalformedHeaders) {
  EXPECT_EQ(parse_kind(bytes_of("P3\n1 1\n255\n", {0})),
            ParseErrorKind::kMalformedHeader);
  EXPECT_EQ(parse_kind(bytes_of("P5\n1\n")), ParseErrorKind::kMalformedHeader);
  EXPECT_EQ(parse_kind(bytes_of("")), ParseErrorKind::kMalformedHeader);
  EXPECT_EQ(parse_kind(bytes_of("P5\n0 3\n255\n")),
            ParseErrorKind::kMalformedHeader);
  EXPECT_EQ(parse_kind(bytes_of("P5\nx 3\n255\n")),
            ParseErrorKind::kMalformedHeader);
}

TEST(Encode, ExactGrayBytes) {
  const Frame f(1, 1, 1, std::uint8_t{0});
  EXPECT_EQ(encode_image(f), bytes_of("P5\n1 1\n255\n", {0}));
}

TEST(Encode, ExactRgbBytes) {
  const Frame f(2, 1, 3, std::uint8_t{255});
  EXPECT_EQ(encode_image(f),
            bytes_of("P6\n2 1\n255\n", {255, 255, 255, 255, 255, 255}));
}

TEST(Encode, RoundTripRandomFrames) {
  std::mt19937 rng(11);
  for (int i = 0; i < 50; ++i) {
    std::uniform_int_distribution<int> dim(1, 40);
    const int w = dim(rng), h = dim(rng);
    const Frame f = (i % 2) ? random_rgb(rng, w, h) : oracle::random_gray(rng, w, h);
    const auto bytes = encode_image(f);
    EXPECT_EQ(decode_image(bytes), f);
    EXPECT_EQ(encode_image(decode_image(bytes)), bytes);
  }
}

TEST(FileIo, WriteThenRead) {
  const auto dir = std::filesystem::temp_directory_path() / "lp_imaging_io";
  std::filesystem::create_directories(dir);
  std::mt19937 rng(3);
  const Frame f = random_rgb(rng, 7, 5);
  write_image(dir / "a.ppm", f);
  EXPECT_EQ(read_image(dir / "a.ppm"), f);
  EXPECT_THROW(read_image(dir / "missing.ppm"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Grayscale, Examples) {
  Frame f(4, 1, 3);
  const int colors[4][3] = {{255, 255, 255}, {0, 0, 0}, {255, 0, 0}, {255, 220, 0}};
  for (int x = 0; x < 4; ++x)
    for (int c = 0; c < 3; ++c) f.at(x, 0, c) = static_cast<std::uint8_t>(colors[x][c]);
  const Frame g = to_grayscale(f);
  EXPECT_EQ(g.channels(), 1);
  EXPECT_EQ(g.at(0, 0), 255);
  EXPECT_EQ(g.at(1, 0), 0);
  EXPECT_EQ(g.at(2, 0), 76);
  EXPECT_EQ(g.at(3, 0), 205);
}

TEST(Grayscale, MatchesLumaFormula) {
  std::mt19937 rng(5);
  const Frame f = random_rgb(rng, 64, 64);
  const Frame g = to_grayscale(f);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const double exact = 0.299 * f.at(x, y, 0) + 0.587 * f.at(x, y, 1) + 0.114 * f.at(x, y, 2);
      EXPECT_LE(std::abs(g.at(x, y) - exact), 0.5 + 1e-9);
    }
}

TEST(Grayscale, RejectsGray) {
  EXPECT_THROW(to_grayscale(Frame(2, 2, 1)), ContractViolation);
}

TEST(Crop, FiveRows) {
  Frame f(2, 5, 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 2; ++x) f.at(x, y) = static_cast<std::uint8_t>(10 * y + x);
  const Frame c = crop_bottom_half(f);
  ASSERT_EQ(c.height(), 3);
  for (int r = 0; r < 3; ++r) EXPECT_EQ(c.at(1, r), 10 * (r + 2) + 1);
}

TEST(Crop, EvenHeightAndChannels) {
  std::mt19937 rng(2);
  const Frame f = random_rgb(rng, 6, 480);
  const Frame c = crop_bottom_half(f);
  EXPECT_EQ(c.height(), 240);
  EXPECT_EQ(c.channels(), 3);
  for (int r = 0; r < 240; ++r)
    EXPECT_TRUE(std::ranges::equal(c.row(r), f.row(240 + r)));
}

TEST(Crop, ComposedHeight) {
  for (int h = 4; h < 40; ++h) {
    const Frame c = crop_bottom_half(crop_bottom_half(Frame(3, h, 1)));
    EXPECT_EQ(c.height(), ((h + 1) / 2 + 1) / 2);
  }
}

TEST(Crop, DegenerateHeight) {
  EXPECT_THROW(crop_bottom_half(Frame(3, 1, 1)), DegenerateInput);
}

TEST(Band, Examples) {
  Frame g(3, 1, 1);
  g.at(0, 0) = 200;
  g.at(1, 0) = 255;
  g.at(2, 0) = 180;
  const BinaryMask m = band_threshold(g, 180, 245);
  EXPECT_TRUE(m.test(0, 0));
  EXPECT_FALSE(m.test(1, 0));
  EXPECT_TRUE(m.test(2, 0));
  EXPECT_EQ(band_threshold(Frame(8, 8, 1, std::uint8_t{40}), 180, 245).count(), 0u);
  EXPECT_THROW(band_threshold(g, 200, 100), ContractViolation);
}

TEST(Band, RowPermutationCommutes) {
  std::mt19937 rng(8);
  const Frame rgb = random_rgb(rng, 16, 12);
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Frame permuted(16, 12, 3);
  for (int y = 0; y < 12; ++y) std::ranges::copy(rgb.row(perm[y]), permuted.row(y).begin());
  const Frame g = to_grayscale(rgb);
  const Frame gp = to_grayscale(permuted);
  const BinaryMask m = band_threshold(g, 90, 170);
  const BinaryMask mp = band_threshold(gp, 90, 170);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x) {
      EXPECT_EQ(gp.at(x, y), g.at(x, perm[y]));
      EXPECT_EQ(mp.test(x, y), m.test(x, perm[y]));
    }
}

TEST(Mask, ApplyKeepsOnlyMarked) {
  Frame g(2, 1, 1);
  g.at(0, 0) = 200;
  g.at(1, 0) = 100;
  const Frame out = apply_mask(g, band_threshold(g, 180, 245));
  EXPECT_EQ(out.at(0, 0), 200);
  EXPECT_EQ(out.at(1, 0), 0);
}

TEST(Blur, KernelNormalizedAndSymmetric) {
  const auto k = gaussian_kernel(2, 1.4);
  ASSERT_EQ(k.size(), 5u);
  EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(k[0], k[4]);
  EXPECT_DOUBLE_EQ(k[1], k[3]);
  EXPECT_NEAR(k[1] / k[2], std::exp(-1.0 / (2 * 1.4 * 1.4)), 1e-12);
}

TEST(Blur, ConstantImage) {
  const Frame f(20, 15, 1, std::uint8_t{100});
  for (int r : {1, 2, 4})
    for (double s : {0.5, 1.4, 3.0}) EXPECT_EQ(gaussian_blur(f, r, s), f);
}

TEST(Blur, ImpulseGivesOuterProduct) {
  Frame f(21, 21, 1);
  f.at(10, 10) = 255;
  const Frame b = gaussian_blur(f, 2, 1.4);
  // Kernel evaluated directly from its formula.
  double w[5], sum = 0;
  for (int i = -2; i <= 2; ++i) sum += w[i + 2] = std::exp(-(i * i) / (2 * 1.4 * 1.4));
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 21; ++x) {
      const int dx = x - 10, dy = y - 10;
      const double expect =
          (std::abs(dx) <= 2 && std::abs(dy) <= 2) ? 255.0 * w[dx + 2] * w[dy + 2] / (sum * sum) : 0.0;
      EXPECT_EQ(b.at(x, y), static_cast<int>(std::floor(expect + 0.5))) << x << "," << y;
    }
}

TEST(Blur, MatchesBruteForce2D) {
  std::mt19937 rng(1234);
  for (int i = 0; i < 200; ++i) {
    const Frame f = oracle::random_gray(rng, 16, 16);
    const Frame fast = gaussian_blur(f, 2, 1.4);
    const Frame slow = oracle::blur_2d(f, 2, 1.4);
    for (std::size_t k = 0; k < fast.data().size(); ++k)
      ASSERT_LE(std::abs(fast.data()[k] - slow.data()[k]), 1);
  }
}

TEST(Blur, MirrorCommutes) {
  std::mt19937 rng(77);
  for (int i = 0; i < 20; ++i) {
    const Frame f = oracle::random_gray(rng, 23, 9);
    EXPECT_EQ(gaussian_blur(mirror_horizontal(f), 2, 1.4),
              mirror_horizontal(gaussian_blur(f, 2, 1.4)));
  }
}

TEST(Blur, StaysWithinInputRange) {
  std::mt19937 rng(99);
  for (int i = 0; i < 50; ++i) {
    const Frame f = oracle::random_blocks(rng, 24, 24);
    const auto [lo, hi] = min_max(f);
    const auto [blo, bhi] = min_max(gaussian_blur(f, 3, 2.0));
    EXPECT_GE(blo, lo - 1);
    EXPECT_LE(bhi, hi + 1);
  }
}

TEST(Blur, Preconditions) {
  const Frame f(4, 4, 1);
  EXPECT_THROW(gaussian_blur(f, 0, 1.0), ContractViolation);
  EXPECT_THROW(gaussian_blur(f, 2, 0.0), ContractViolation);
  EXPECT_THROW(gaussian_blur(Frame(4, 4, 3), 2, 1.0), ContractViolation);
}

TEST(Mirror, Involution) {
  std::mt19937 rng(4);
  const Frame f = random_rgb(rng, 9, 4);
  EXPECT_EQ(mirror_horizontal(mirror_horizontal(f)), f);
  EXPECT_EQ(mirror_horizontal(f).at(0, 2, 1), f.at(8, 2, 1));
}
