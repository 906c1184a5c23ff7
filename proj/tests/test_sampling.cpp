#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>
#include <tuple>

#include "strotss/sampling.hpp"

namespace strotss {
namespace {

std::set<std::pair<double, double>> as_set(const std::vector<Coord>& c) {
  std::set<std::pair<double, double>> s;
  for (const Coord& p : c) s.insert({p.y, p.x});
  return s;
}

bool in_bounds(const std::vector<Coord>& c, std::size_t h, std::size_t w) {
  for (const Coord& p : c) {
    if (p.y < 0 || p.x < 0 || p.y > double(h - 1) || p.x > double(w - 1)) return false;
    if (p.y != std::floor(p.y) || p.x != std::floor(p.x)) return false;
  }
  return true;
}

TEST(StyleSampling, FullDrawCoversEveryPixelOnce) {
  Rng rng(1);
  const auto c = sample_style_coords(7, 9, 63, rng);
  ASSERT_EQ(c.size(), 63u);
  EXPECT_EQ(as_set(c).size(), 63u);
  EXPECT_TRUE(in_bounds(c, 7, 9));
}

TEST(StyleSampling, SameSeedSameDraw) {
  Rng a(5), b(5), c(6);
  const auto x = sample_style_coords(64, 64, 200, a);
  EXPECT_EQ(x, sample_style_coords(64, 64, 200, b));
  EXPECT_NE(x, sample_style_coords(64, 64, 200, c));
}

TEST(StyleSampling, DistinctInBoundsOnLargeImage) {
  Rng rng(2);
  const auto c = sample_style_coords(256, 256, 1024, rng);
  EXPECT_EQ(as_set(c).size(), 1024u);
  EXPECT_TRUE(in_bounds(c, 256, 256));
}

TEST(StyleSampling, RoughlyUniform) {
  // Quadrant counts over many draws stay near a quarter each.
  Rng rng(3);
  std::array<int, 4> q{};
  for (int t = 0; t < 200; ++t)
    for (const Coord& p : sample_style_coords(32, 32, 64, rng))
      ++q[(p.y >= 16 ? 2 : 0) + (p.x >= 16 ? 1 : 0)];
  for (int v : q) EXPECT_NEAR(v / 12800.0, 0.25, 0.02);
}

TEST(StyleSampling, TooManyIsPreconditionError) {
  Rng rng(4);
  EXPECT_THROW(sample_style_coords(4, 4, 17, rng), PreconditionError);
  EXPECT_THROW(sample_content_coords(4, 4, 17, rng), PreconditionError);
}

TEST(ContentSampling, SquareImageUses32By32Grid) {
  const GridShape g = content_grid_shape(256, 256, 1024);
  EXPECT_EQ(g.rows, 32u);
  EXPECT_EQ(g.cols, 32u);
  const auto c = content_grid(256, 256, 1024, 0, 0);
  ASSERT_EQ(c.size(), 1024u);
  for (std::size_t r = 0; r < 32; ++r)
    for (std::size_t k = 0; k < 32; ++k) {
      EXPECT_EQ(c[r * 32 + k].y, 8.0 * r);
      EXPECT_EQ(c[r * 32 + k].x, 8.0 * k);
    }
}

TEST(ContentSampling, ZeroOffsetStartsAtOrigin) {
  const auto c = content_grid(100, 60, 50, 0, 0);
  EXPECT_EQ(c.front(), (Coord{0, 0}));
}

TEST(ContentSampling, AspectFollowsImage) {
  const GridShape g = content_grid_shape(64, 256, 1024);
  EXPECT_EQ(g.rows, 16u);
  EXPECT_EQ(g.cols, 64u);
  const GridShape t = content_grid_shape(300, 100, 1024);
  EXPECT_GE(t.rows * t.cols, 1024u);
  EXPECT_GT(t.rows, t.cols);
}

TEST(ContentSampling, ExactCountInBoundsAndDistinctForAnyOffset) {
  Rng rng(7);
  for (auto [h, w, n] : {std::tuple<std::size_t, std::size_t, std::size_t>{64, 64, 1024},
                         {37, 53, 1024}, {96, 160, 1024}, {33, 33, 1000}, {5, 300, 1024}}) {
    for (int t = 0; t < 20; ++t) {
      const auto c = sample_content_coords(h, w, n, rng);
      EXPECT_EQ(c.size(), n);
      EXPECT_TRUE(in_bounds(c, h, w)) << h << "x" << w;
      EXPECT_EQ(as_set(c).size(), n) << h << "x" << w;
    }
  }
}

TEST(ContentSampling, SharedOffsetKeepsSpacingUniform) {
  const auto c = content_grid(256, 256, 1024, 3.5, 7.9);
  for (std::size_t r = 0; r < 32; ++r)
    for (std::size_t k = 0; k < 32; ++k) {
      EXPECT_EQ(c[r * 32 + k].y, 3 + 8.0 * r);
      EXPECT_EQ(c[r * 32 + k].x, 7 + 8.0 * k);
    }
  EXPECT_THROW(content_grid(256, 256, 1024, 8.0, 0), PreconditionError);
}

TEST(ContentSampling, Deterministic) {
  Rng a(11), b(11);
  EXPECT_EQ(sample_content_coords(80, 120, 1024, a), sample_content_coords(80, 120, 1024, b));
}

}  // namespace
}  // namespace strotss
