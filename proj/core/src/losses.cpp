#include "strotss/losses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "strotss/ops.hpp"

namespace strotss {
namespace {

template <typename T>
void require_matrix(BasicVar<T> v, const char* what) {
  if (v.shape().size() != 2) {
    throw ShapeError(std::string(what) + " expects a rank-2 feature matrix, got " +
                     shape_string(v.shape()));
  }
}

template <typename T>
void require_same_dim(BasicVar<T> a, BasicVar<T> b, const char* what) {
  require_matrix(a, what);
  require_matrix(b, what);
  if (a.shape()[1] != b.shape()[1]) {
    throw ShapeError(std::string(what) + " feature dimension mismatch " +
                     shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

template <typename T>
BasicVar<T> one_minus(BasicVar<T> x) {
  return add_scalar(scale(x, T{-1}), T{1});
}

// Strict order on (rows, values) used to pick a fixed GEMM operand order.
template <typename T>
bool precedes(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.dim(0) != b.dim(0)) return a.dim(0) < b.dim(0);
  return std::lexicographical_compare(a.raw(), a.raw() + a.size(), b.raw(), b.raw() + b.size());
}

}  // namespace

template <typename T>
BasicVar<T> cosine_cost(BasicVar<T> a, BasicVar<T> b) {
  require_same_dim(a, b, "cosine_cost");
  // The GEMM is not bitwise transpose-symmetric; run one product for both
  // argument orders so that swapping the sets transposes C exactly.
  if (precedes(b.value(), a.value())) return transpose(cosine_cost(b, a));
  const T eps = static_cast<T>(kNormGuard);
  BasicVar<T> c = one_minus(matmul(row_normalize(a, eps), row_normalize(b, eps), false, true));
  // Rounding can step just outside [0,2]; clamp so the bounds hold exactly.
  c = relu(c);
  return add_scalar(scale(relu(add_scalar(scale(c, T{-1}), T{2})), T{-1}), T{2});
}

template <typename T>
BasicVar<T> euclidean_cost(BasicVar<T> a, BasicVar<T> b) {
  require_same_dim(a, b, "euclidean_cost");
  // Same canonical order as cosine_cost, for the same reason.
  if (precedes(b.value(), a.value())) return transpose(euclidean_cost(b, a));
  return pairwise_distance(a, b);
}

template <typename T>
BasicVar<T> ground_cost(BasicVar<T> a, BasicVar<T> b, GroundMetric metric) {
  return metric == GroundMetric::Cosine ? cosine_cost(a, b) : euclidean_cost(a, b);
}

template <typename T>
RelaxedEmd<T> relaxed_emd(BasicVar<T> cost) {
  require_matrix(cost, "relaxed_emd");
  BasicVar<T> r_a = mean(min(cost, 1));
  BasicVar<T> r_b = mean(min(cost, 0));
  const std::array<BasicVar<T>, 2> both = {reshape(r_a, {1}), reshape(r_b, {1})};
  BasicVar<T> remd = max(concat(std::span<const BasicVar<T>>(both), 0));
  return {r_a, r_b, remd};
}

template <typename T>
BasicVar<T> moment_loss(BasicVar<T> a, BasicVar<T> b) {
  require_same_dim(a, b, "moment_loss");
  if (a.shape()[0] < 2 || b.shape()[0] < 2) {
    throw PreconditionError("moment_loss needs at least two rows per set");
  }
  const T d = static_cast<T>(a.shape()[1]);
  auto moments = [](BasicVar<T> x) {
    BasicVar<T> mu = mean(x, 0);
    BasicVar<T> centered = x - mu;
    BasicVar<T> cov = scale(gram(centered, GramSide::Cols),
                            T{1} / static_cast<T>(x.shape()[0]));
    return std::pair{mu, cov};
  };
  auto [mu_a, cov_a] = moments(a);
  auto [mu_b, cov_b] = moments(b);
  BasicVar<T> mean_term = scale(sum(abs(mu_a - mu_b)), T{1} / d);
  BasicVar<T> cov_term = scale(sum(abs(cov_a - cov_b)), T{1} / (d * d));
  return mean_term + cov_term;
}

template <typename T>
BasicTensor<T> palette_transform() {
  const double r3 = std::sqrt(3.0), r2 = std::sqrt(2.0), r6 = std::sqrt(6.0);
  const std::vector<double> m = {1 / r3, 1 / r3, 1 / r3,  //
                                 1 / r2, 0,      -1 / r2,  //
                                 1 / r6, -2 / r6, 1 / r6};
  return BasicTensor<T>({3, 3}, std::vector<T>(m.begin(), m.end()));
}

template <typename T>
BasicVar<T> palette_loss(BasicVar<T> x_pixels, BasicVar<T> s_pixels) {
  require_same_dim(x_pixels, s_pixels, "palette_loss");
  if (x_pixels.shape()[1] != 3) {
    throw ShapeError("palette_loss expects [n,3] pixels, got " +
                     shape_string(x_pixels.shape()));
  }
  BasicVar<T> m = x_pixels.graph().constant(palette_transform<T>());
  BasicVar<T> x = matmul(x_pixels, m, false, true);
  BasicVar<T> s = matmul(s_pixels, m, false, true);
  return relaxed_emd(euclidean_cost(x, s)).remd;
}

template <typename T>
BasicVar<T> self_similarity_loss(BasicVar<T> f_x, BasicVar<T> f_c) {
  require_same_dim(f_x, f_c, "self_similarity_loss");
  if (f_x.shape()[0] != f_c.shape()[0]) {
    throw ShapeError("self_similarity_loss row count mismatch " +
                     shape_string(f_x.shape()) + " vs " + shape_string(f_c.shape()));
  }
  if (f_x.shape()[0] < 2) {
    throw PreconditionError("self_similarity_loss needs at least two rows");
  }
  const T eps = static_cast<T>(kNormGuard);
  auto normalized = [eps](BasicVar<T> f) {
    BasicVar<T> d = one_minus(gram(row_normalize(f, eps), GramSide::Rows));
    return d / add_scalar(sum(d, 0, true), eps);
  };
  return mean(abs(normalized(f_x) - normalized(f_c)));
}

double total_loss_denominator(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw PreconditionError("alpha must be a positive finite number, got " +
                            std::to_string(alpha));
  }
  return 2.0 + alpha + 1.0 / alpha;
}

template <typename T>
BasicVar<T> total_loss(BasicVar<T> content, BasicVar<T> moment,
                       BasicVar<T> remd, BasicVar<T> palette, T alpha) {
  const T denom = static_cast<T>(total_loss_denominator(alpha));
  BasicVar<T> num = scale(content, alpha) + moment + remd + scale(palette, T{1} / alpha);
  return num / content.graph().constant(BasicTensor<T>::scalar(denom));
}

template <typename T>
T combine_losses(T content, T moment, T remd, T palette, T alpha) {
  const T denom = static_cast<T>(total_loss_denominator(alpha));
  const T num = content * alpha + moment + remd + palette * (T{1} / alpha);
  return num / denom;
}

#define STROTSS_INSTANTIATE(T)                                                   \
  template BasicVar<T> cosine_cost(BasicVar<T>, BasicVar<T>);                    \
  template BasicVar<T> euclidean_cost(BasicVar<T>, BasicVar<T>);                 \
  template BasicVar<T> ground_cost(BasicVar<T>, BasicVar<T>, GroundMetric);     \
  template RelaxedEmd<T> relaxed_emd(BasicVar<T>);                               \
  template BasicVar<T> moment_loss(BasicVar<T>, BasicVar<T>);                    \
  template BasicTensor<T> palette_transform();                                   \
  template BasicVar<T> palette_loss(BasicVar<T>, BasicVar<T>);                   \
  template BasicVar<T> self_similarity_loss(BasicVar<T>, BasicVar<T>);           \
  template BasicVar<T> total_loss(BasicVar<T>, BasicVar<T>, BasicVar<T>,         \
                                  BasicVar<T>, T);                               \
  template T combine_losses(T, T, T, T, T);

STROTSS_INSTANTIATE(float)
STROTSS_INSTANTIATE(double)
#undef STROTSS_INSTANTIATE

}  // namespace strotss
