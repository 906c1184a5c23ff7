#include <gtest/gtest.h>

#include <cmath>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "strotss/ops.hpp"
#include "strotss/pyramid.hpp"

namespace strotss {
namespace {

namespace ref = testing::ref;

Tensor random_image(std::size_t h, std::size_t w, Rng& rng) {
  Tensor t({3, h, w});
  for (float& v : t.data()) v = static_cast<float>(rng.uniform());
  return t;
}

std::size_t ceil_pow2(std::size_t v, std::size_t k) { return (v + (1u << k) - 1) >> k; }

TEST(Pyramid, SingleLevelIsTheImage) {
  Rng rng(1);
  const Tensor x = random_image(9, 7, rng);
  const LaplacianPyramid p = decompose(x, 1);
  ASSERT_EQ(p.level_count(), 1u);
  EXPECT_EQ(p.levels[0], x);
  EXPECT_EQ(reconstruct(p), x);
}

TEST(Pyramid, ConstantImageHasZeroDetail) {
  const Tensor x({3, 40, 24}, 0.375f);
  const LaplacianPyramid p = decompose(x, 5);
  ASSERT_EQ(p.level_count(), 5u);
  for (std::size_t k = 0; k + 1 < 5; ++k)
    for (float v : p.levels[k].data()) EXPECT_EQ(v, 0.0f) << "level " << k;
  for (float v : p.levels.back().data()) EXPECT_EQ(v, 0.375f);
}

TEST(Pyramid, ZeroPyramidReconstructsToZero) {
  LaplacianPyramid p;
  for (std::size_t k = 0; k < 4; ++k) p.levels.emplace_back(Shape{3, ceil_pow2(30, k), ceil_pow2(17, k)});
  const Tensor x = reconstruct(p);
  EXPECT_EQ(x.shape(), (Shape{3, 30, 17}));
  for (float v : x.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Pyramid, LevelDimsAreCeilHalvings) {
  Rng rng(2);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{64, 64}, {96, 160}, {37, 53}}) {
    const LaplacianPyramid p = decompose(random_image(h, w, rng), 5);
    for (std::size_t k = 0; k < 5; ++k)
      EXPECT_EQ(p.levels[k].shape(), (Shape{3, ceil_pow2(h, k), ceil_pow2(w, k)}));
  }
}

TEST(Pyramid, LevelsMatchIndependentConstruction) {
  Rng rng(3);
  const Tensor x = random_image(22, 30, rng);
  const LaplacianPyramid p = decompose(x, 3);
  // down^k by half-resizes, band = down^k - up(down^(k+1)).
  std::vector<testing::TensorD> down{x.cast<double>()};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& d = down.back();
    down.push_back(ref::resize(d, (d.dim(1) + 1) / 2, (d.dim(2) + 1) / 2));
  }
  for (std::size_t k = 0; k < 3; ++k) {
    testing::TensorD want = down[k];
    if (k < 2) {
      const auto up = ref::resize(down[k + 1], want.dim(1), want.dim(2));
      for (std::size_t i = 0; i < want.size(); ++i) want[i] -= up[i];
    }
    EXPECT_LT(max_abs_diff(p.levels[k].cast<double>(), want), 1e-5) << "level " << k;
  }
}

TEST(Pyramid, RoundTripAtSupportedSizes) {
  Rng rng(4);
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{64, 64}, {128, 128}, {96, 160},
                      {16, 16}, {33, 65}, {512, 384}}) {
    const Tensor x = random_image(h, w, rng);
    const std::size_t levels = supported_levels({h, w});
    EXPECT_EQ(levels, 5u);
    EXPECT_LT(max_abs_diff(reconstruct(decompose(x, levels)), x), 1e-5) << h << "x" << w;
  }
}

TEST(Pyramid, SupportedLevelsFollowsSmallestSide) {
  EXPECT_EQ(supported_levels({1, 1}), 1u);
  EXPECT_EQ(supported_levels({2, 100}), 2u);
  EXPECT_EQ(supported_levels({7, 100}), 3u);
  EXPECT_EQ(supported_levels({8, 100}), 4u);
  EXPECT_EQ(supported_levels({16, 100}), 5u);
  EXPECT_EQ(supported_levels({1000, 1000}), 5u);
  EXPECT_EQ(supported_levels({1000, 1000}, 7), 7u);
}

TEST(Pyramid, TooSmallIsPreconditionError) {
  Rng rng(5);
  EXPECT_THROW(decompose(random_image(15, 64, rng), 5), PreconditionError);
  EXPECT_THROW(decompose(random_image(8, 8, rng), 0), PreconditionError);
  EXPECT_THROW(decompose(Tensor({8, 8}), 2), ShapeError);
}

TEST(Pyramid, DimMismatchIsShapeError) {
  LaplacianPyramid p;
  p.levels = {Tensor({3, 8, 8}), Tensor({1, 4, 4})};
  EXPECT_THROW(reconstruct(p), ShapeError);
  Graph g;
  const std::vector<Var> v{g.leaf(Tensor({3, 8, 8})), g.leaf(Tensor({1, 4, 4}))};
  EXPECT_THROW(reconstruct(std::span(v)), ShapeError);
  EXPECT_THROW(reconstruct(LaplacianPyramid{}), PreconditionError);
}

TEST(Pyramid, DifferentiableReconstructMatchesPlain) {
  Rng rng(6);
  const LaplacianPyramid p = decompose(random_image(40, 28, rng), 4);
  Graph g;
  std::vector<Var> v;
  for (const auto& l : p.levels) v.push_back(g.leaf(l));
  EXPECT_EQ(reconstruct(std::span(std::as_const(v))).value(), reconstruct(p));
}

}  // namespace
}  // namespace strotss
