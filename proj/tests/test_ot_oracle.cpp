#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "strotss/ot_oracle.hpp"

namespace strotss {
namespace {

namespace ref = testing::ref;
using TensorD = BasicTensor<double>;

TensorD random_cost(std::size_t n, Rng& rng) {
  TensorD c({n, n});
  for (double& v : c.data()) v = rng.uniform();
  return c;
}

bool is_permutation(const std::vector<std::size_t>& p) {
  std::vector<std::size_t> s = p;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] != i) return false;
  return true;
}

TEST(ExactEmd, TwoByTwoExample) {
  const Assignment a = exact_emd_uniform(TensorD({2, 2}, {1, 2, 3, 1}));
  EXPECT_EQ(a.cost, 1.0);
  EXPECT_EQ(a.permutation, (std::vector<std::size_t>{0, 1}));
}

TEST(ExactEmd, AntiDiagonalPreferred) {
  const Assignment a = exact_emd_uniform(TensorD({2, 2}, {5, 1, 1, 5}));
  EXPECT_EQ(a.cost, 1.0);
  EXPECT_EQ(a.permutation, (std::vector<std::size_t>{1, 0}));
}

TEST(ExactEmd, ZeroDiagonalGivesIdentity) {
  Rng rng(1);
  TensorD c = random_cost(12, rng);
  for (std::size_t i = 0; i < 12; ++i) c.at(i, i) = 0;
  const Assignment a = exact_emd_uniform(c);
  EXPECT_EQ(a.cost, 0.0);
  std::vector<std::size_t> id(12);
  std::iota(id.begin(), id.end(), 0);
  EXPECT_EQ(a.permutation, id);
}

TEST(ExactEmd, MatchesBruteForceExactly) {
  Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const TensorD c = random_cost(n, rng);
    const Assignment a = exact_emd_uniform(c);
    ASSERT_TRUE(is_permutation(a.permutation));
    EXPECT_EQ(a.cost, ref::brute_force_emd(ref::to_mat(c))) << "trial " << trial;
    EXPECT_EQ(a.cost, ref::assignment_cost(ref::to_mat(c), a.permutation));
  }
}

TEST(ExactEmd, HandlesTiesAndIntegerCosts) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    TensorD c({6, 6});
    for (double& v : c.data()) v = static_cast<double>(rng.uniform_int(3));
    EXPECT_EQ(exact_emd_uniform(c).cost, ref::brute_force_emd(ref::to_mat(c)));
  }
}

TEST(ExactEmd, InvariantToRelabeling) {
  Rng rng(4);
  const std::size_t n = 30;
  const TensorD c = random_cost(n, rng);
  std::vector<std::size_t> p(n), q(n);
  std::iota(p.begin(), p.end(), 0);
  std::iota(q.begin(), q.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(p[i - 1], p[rng.uniform_int(i)]);
    std::swap(q[i - 1], q[rng.uniform_int(i)]);
  }
  TensorD same({n, n}), rows_only({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      same.at(i, j) = c.at(p[i], p[j]);
      rows_only.at(i, j) = c.at(p[i], q[j]);
    }
  const double base = exact_emd_uniform(c).cost;
  EXPECT_NEAR(exact_emd_uniform(same).cost, base, 1e-12);
  EXPECT_NEAR(exact_emd_uniform(rows_only).cost, base, 1e-12);
}

TEST(ExactEmd, ZeroIffZeroPermutationExists) {
  Rng rng(5);
  TensorD c = random_cost(7, rng);
  for (double& v : c.data()) v += 0.1;
  const std::vector<std::size_t> sigma{3, 0, 6, 1, 5, 2, 4};
  for (std::size_t i = 0; i < 7; ++i) c.at(i, sigma[i]) = 0;
  EXPECT_EQ(exact_emd_uniform(c).cost, 0.0);
  EXPECT_EQ(exact_emd_uniform(c).permutation, sigma);
  c.at(2, sigma[2]) = 1e-9;  // every permutation now hits a positive entry
  EXPECT_GT(exact_emd_uniform(c).cost, 0.0);
}

TEST(ExactEmd, RelaxedEmdIsALowerBound) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const TensorD c = random_cost(2 + rng.uniform_int(40), rng);
    EXPECT_LE(relaxed_emd_value(c), exact_emd_uniform(c).cost + 1e-6);
    EXPECT_NEAR(relaxed_emd_value(c), ref::relaxed_emd(ref::to_mat(c)).remd, 1e-12);
  }
}

TEST(ExactEmd, FloatOverloadAgrees) {
  Rng rng(7);
  Tensor c({9, 9});
  for (float& v : c.data()) v = static_cast<float>(rng.uniform());
  EXPECT_EQ(exact_emd_uniform(c).cost, exact_emd_uniform(c.cast<double>()).cost);
}

TEST(ExactEmd, BadInputsArePreconditionErrors) {
  EXPECT_THROW(exact_emd_uniform(TensorD({2, 3})), PreconditionError);
  EXPECT_THROW(exact_emd_uniform(TensorD({2, 2}, {0, -1, 0, 0})), PreconditionError);
  EXPECT_THROW(exact_emd_uniform(TensorD({2, 2}, {0, INFINITY, 0, 0})), PreconditionError);
  EXPECT_THROW(exact_emd_uniform(TensorD({4})), PreconditionError);
}

TEST(TightnessRatio, GuardedAtZero) {
  EXPECT_EQ(tightness_ratio(TensorD({2, 2}, {0, 1, 1, 0})), 1.0);
  EXPECT_DOUBLE_EQ(tightness_ratio(TensorD({2, 2}, {1, 2, 3, 1})), 1.0);
  // Rows 0 and 1 both prefer column 0: every minimum is 1, so REMD = 1,
  // while any matching pays a 3 once: EMD = (1 + 3 + 1) / 3.
  EXPECT_DOUBLE_EQ(tightness_ratio(TensorD({3, 3}, {1, 3, 3, 1, 3, 3, 3, 1, 1})), 0.6);
}

TEST(TightnessStudyTest, IdenticalPairsGiveRatioOne) {
  const auto pairs = random_feature_pairs(5, 32, 16, 9, true);
  for (const auto& p : pairs) EXPECT_EQ(p.a, p.b);
  for (auto metric : {GroundMetric::Cosine, GroundMetric::Euclidean}) {
    const TightnessStudy s = remd_tightness_study(pairs, metric);
    EXPECT_EQ(s.count, 5u);
    for (double r : s.ratios) EXPECT_NEAR(r, 1.0, 1e-12);
    EXPECT_NEAR(s.mean, 1.0, 1e-12);
    EXPECT_NEAR(s.stddev, 0.0, 1e-12);
  }
}

TEST(TightnessStudyTest, RandomPairsAreStrictlyInsideUnitInterval) {
  const auto pairs = random_feature_pairs(20, 64, 32, 10);
  const TightnessStudy s = remd_tightness_study(pairs, GroundMetric::Cosine);
  ASSERT_EQ(s.ratios.size(), 20u);
  for (double r : s.ratios) EXPECT_LE(r, 1.0 + 1e-6);
  EXPECT_GT(s.mean, 0.0);
  EXPECT_LT(s.mean, 1.0);
  double var = 0;
  for (double r : s.ratios) var += (r - s.mean) * (r - s.mean);
  EXPECT_NEAR(s.stddev, std::sqrt(var / 20), 1e-12);
}

TEST(TightnessStudyTest, RandomPairsAreDeterministic) {
  EXPECT_EQ(random_feature_pairs(3, 8, 4, 42)[2].b, random_feature_pairs(3, 8, 4, 42)[2].b);
  EXPECT_NE(random_feature_pairs(1, 8, 4, 42)[0].a, random_feature_pairs(1, 8, 4, 43)[0].a);
}

TEST(TightnessStudyTest, MismatchedPairIsPreconditionError) {
  std::vector<FeaturePair> pairs{{Tensor({4, 3}), Tensor({5, 3})}};
  EXPECT_THROW(remd_tightness_study(pairs, GroundMetric::Cosine), PreconditionError);
}

TEST(TightnessBudget, OverBudgetIsResourceError) {
  EXPECT_GT(tightness_memory_estimate(1024, 2176), tightness_memory_estimate(128, 2176));
  EXPECT_NO_THROW(check_tightness_budget(128, 64, std::size_t{1} << 30));
  EXPECT_THROW(check_tightness_budget(1 << 20, 2176, std::size_t{1} << 30), ResourceError);
}

}  // namespace
}  // namespace strotss
