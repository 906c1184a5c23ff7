#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "strotss/graph.hpp"
#include "strotss/ops.hpp"
#include "strotss/random.hpp"

namespace strotss::testing {

using TensorD = BasicTensor<double>;

// Result of comparing analytic gradients with finite differences.
struct GradCheck {
  double rel_error = 0;  // |g_analytic - g_fd| / |g_fd|, norms over all leaves
  double fd_norm = 0;
};

// `fn(graph, leaves)` must be generic over the scalar type and return a
// rank-0 variable. Analytic gradients come from the float graph; central
// differences are evaluated with a double graph.
template <typename Fn>
GradCheck gradcheck(Fn&& fn, std::vector<TensorD> inputs, double eps = 1e-3) {
  std::vector<Tensor> analytic;
  {
    Graph g;
    std::vector<Var> leaves;
    for (const auto& x : inputs) leaves.push_back(g.leaf(x.cast<float>()));
    Var root = fn(g, std::span<const Var>(leaves));
    g.backward(root);
    for (auto& l : leaves) analytic.push_back(g.grad(l));
  }
  auto eval = [&] {
    BasicGraph<double> g;
    std::vector<BasicVar<double>> leaves;
    for (const auto& x : inputs) leaves.push_back(g.leaf(x, false));
    return fn(g, std::span<const BasicVar<double>>(leaves)).item();
  };
  double num = 0, den = 0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double x0 = inputs[k][i];
      inputs[k][i] = x0 + eps;
      const double fp = eval();
      inputs[k][i] = x0 - eps;
      const double fm = eval();
      inputs[k][i] = x0;
      const double fd = (fp - fm) / (2 * eps);
      const double diff = static_cast<double>(analytic[k][i]) - fd;
      num += diff * diff;
      den += fd * fd;
    }
  }
  GradCheck r;
  r.fd_norm = std::sqrt(den);
  r.rel_error = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
  return r;
}

// Same contract, but compares directional derivatives along `directions`
// random unit directions. Used where per-coordinate differences are too
// expensive (whole network passes).
template <typename Fn>
GradCheck directional_gradcheck(Fn&& fn, const std::vector<TensorD>& inputs, Rng& rng,
                                std::size_t directions, double eps = 1e-3) {
  std::vector<Tensor> analytic;
  {
    Graph g;
    std::vector<Var> leaves;
    for (const auto& x : inputs) leaves.push_back(g.leaf(x.cast<float>()));
    Var root = fn(g, std::span<const Var>(leaves));
    g.backward(root);
    for (auto& l : leaves) analytic.push_back(g.grad(l));
  }
  auto eval = [&](const std::vector<TensorD>& xs) {
    BasicGraph<double> g;
    std::vector<BasicVar<double>> leaves;
    for (const auto& x : xs) leaves.push_back(g.leaf(x, false));
    return fn(g, std::span<const BasicVar<double>>(leaves)).item();
  };
  double num = 0, den = 0;
  for (std::size_t d = 0; d < directions; ++d) {
    std::vector<TensorD> dir;
    double norm2 = 0;
    for (const auto& x : inputs) {
      TensorD v(x.shape());
      for (auto& e : v.data()) {
        e = rng.normal();
        norm2 += e * e;
      }
      dir.push_back(std::move(v));
    }
    const double inv = 1.0 / std::sqrt(norm2);
    std::vector<TensorD> plus = inputs, minus = inputs;
    double dot = 0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      for (std::size_t i = 0; i < inputs[k].size(); ++i) {
        const double v = dir[k][i] * inv;
        plus[k][i] += eps * v;
        minus[k][i] -= eps * v;
        dot += static_cast<double>(analytic[k][i]) * v;
      }
    }
    const double fd = (eval(plus) - eval(minus)) / (2 * eps);
    num += (dot - fd) * (dot - fd);
    den += fd * fd;
  }
  GradCheck r;
  r.fd_norm = std::sqrt(den);
  r.rel_error = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
  return r;
}

inline TensorD uniform_tensor(Shape shape, Rng& rng, double lo = -2, double hi = 2) {
  TensorD t(std::move(shape));
  for (auto& v : t.data()) v = lo + (hi - lo) * rng.uniform();
  return t;
}

// Values in [-2,2] with pairwise gaps of at least 1.2/size and none near
// zero, so that max/min/relu/abs stay on one branch under small
// perturbations.
inline TensorD spaced_tensor(Shape shape, Rng& rng) {
  TensorD t(std::move(shape));
  const std::size_t n = t.size();
  const double step = 4.0 / static_cast<double>(n);
  std::vector<double> levels(n);
  for (std::size_t k = 0; k < n; ++k) {
    levels[k] = -2.0 + step * (static_cast<double>(k) + 0.5) +
                0.3 * step * (2 * rng.uniform() - 1);
  }
  for (std::size_t k = n; k > 1; --k) std::swap(levels[k - 1], levels[rng.uniform_int(k)]);
  std::copy(levels.begin(), levels.end(), t.data().begin());
  return t;
}

// sum(y * w) with a fixed weight tensor, reducing any output to a scalar
// that exercises the full vector-Jacobian product.
template <typename T>
BasicVar<T> project(BasicVar<T> y, const TensorD& w) {
  auto& g = y.graph();
  if (y.shape().empty()) return scale(y, static_cast<T>(w[0]));
  return sum(mul(y, g.constant(w.reshaped(y.shape()).template cast<T>())));
}

}  // namespace strotss::testing
