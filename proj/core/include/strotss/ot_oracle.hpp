#pragma once

#include <cstdint>
#include <vector>

#include "strotss/feature_net.hpp"
#include "strotss/losses.hpp"
#include "strotss/random.hpp"

namespace strotss {

// Optimal one-to-one matching for a square cost matrix.
struct Assignment {
  std::vector<std::size_t> permutation;  // row i is matched to column permutation[i]
  double cost = 0.0;                     // (1/n) sum_i C[i][permutation[i]]
};

// Exact earth mover's distance between two uniform-mass sets of equal size,
// solved as an assignment problem (Hungarian method, O(n^3)).
Assignment exact_emd_uniform(const BasicTensor<double>& cost);
Assignment exact_emd_uniform(const Tensor& cost);

// Relaxed EMD of a cost matrix, in double precision.
double relaxed_emd_value(const BasicTensor<double>& cost);

// REMD / EMD, defined as 1 when the EMD is 0.
double tightness_ratio(const BasicTensor<double>& cost);

struct FeaturePair {
  Tensor a;  // [n,d]
  Tensor b;  // [n,d]
};

struct TightnessStudy {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::vector<double> ratios;
};

TightnessStudy remd_tightness_study(const std::vector<FeaturePair>& pairs,
                                    GroundMetric metric);

// Pairs of [n,dim] standard-normal feature sets. With `identical`, b == a.
std::vector<FeaturePair> random_feature_pairs(std::size_t count, std::size_t n,
                                              std::size_t dim, std::uint64_t seed,
                                              bool identical = false);

// n hypercolumns from each image at random distinct pixels.
FeaturePair image_feature_pair(const Tensor& image_a, const Tensor& image_b,
                               const WeightStore& weights, std::size_t n, Rng& rng,
                               const NetworkSpec& spec = NetworkSpec::vgg16());

// Peak working-set estimate for one study pair, in bytes.
std::size_t tightness_memory_estimate(std::size_t n, std::size_t dim);

// Throws ResourceError when the estimate exceeds the budget.
void check_tightness_budget(std::size_t n, std::size_t dim, std::size_t budget_bytes);

}  // namespace strotss
