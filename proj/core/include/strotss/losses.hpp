#pragma once

#include "strotss/graph.hpp"

// Loss terms of the stylization objective. Feature sets are rank-2 [n,d]
// variables whose rows are individual feature vectors.
namespace strotss {

inline constexpr double kNormGuard = 1e-12;

enum class GroundMetric { Cosine, Euclidean };

// C_ij = 1 - <A_i, B_j> / (|A_i| |B_j|), norms guarded by kNormGuard.
template <typename T>
BasicVar<T> cosine_cost(BasicVar<T> a, BasicVar<T> b);

// C_ij = |A_i - B_j|_2.
template <typename T>
BasicVar<T> euclidean_cost(BasicVar<T> a, BasicVar<T> b);

template <typename T>
BasicVar<T> ground_cost(BasicVar<T> a, BasicVar<T> b, GroundMetric metric);

template <typename T>
struct RelaxedEmd {
  BasicVar<T> r_a;   // mean over rows of the row minimum
  BasicVar<T> r_b;   // mean over columns of the column minimum
  BasicVar<T> remd;  // max(r_a, r_b); r_a wins ties
};

template <typename T>
RelaxedEmd<T> relaxed_emd(BasicVar<T> cost);

// (1/d)|mu_A - mu_B|_1 + (1/d^2)|Sigma_A - Sigma_B|_1 with population
// covariances.
template <typename T>
BasicVar<T> moment_loss(BasicVar<T> a, BasicVar<T> b);

// Orthonormal decorrelating color transform; row 0 is the mean-color axis.
template <typename T>
BasicTensor<T> palette_transform();

// Relaxed EMD between RGB sets [n,3] and [m,3] under the Euclidean metric
// in the decorrelated color space.
template <typename T>
BasicVar<T> palette_loss(BasicVar<T> x_pixels, BasicVar<T> s_pixels);

// Mean absolute difference of the column-normalized cosine self-distance
// matrices of two positionally paired feature sets.
template <typename T>
BasicVar<T> self_similarity_loss(BasicVar<T> f_x, BasicVar<T> f_c);

// Denominator 2 + alpha + 1/alpha of the weighted total.
double total_loss_denominator(double alpha);

template <typename T>
BasicVar<T> total_loss(BasicVar<T> content, BasicVar<T> moment,
                       BasicVar<T> remd, BasicVar<T> palette, T alpha);

// Plain arithmetic version of total_loss.
template <typename T>
T combine_losses(T content, T moment, T remd, T palette, T alpha);

}  // namespace strotss
