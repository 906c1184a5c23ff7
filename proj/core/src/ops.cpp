#include "strotss/ops.hpp"

#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <string>

namespace strotss {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <typename T>
BasicGraph<T>& graph_of(BasicVar<T> a, BasicVar<T> b) {
  if (&a.graph() != &b.graph()) {
    throw StateError("operands belong to different graphs");
  }
  return a.graph();
}

// Strided walk over a broadcast output. Extents are right-aligned as in numpy.
struct BroadcastPlan {
  Shape out;
  std::vector<std::size_t> a_stride;
  std::vector<std::size_t> b_stride;
  bool same = false;

  BroadcastPlan(const Shape& a, const Shape& b) {
    const std::size_t rank = std::max(a.size(), b.size());
    out.assign(rank, 1);
    a_stride.assign(rank, 0);
    b_stride.assign(rank, 0);
    same = a == b;
    std::size_t sa = 1, sb = 1;
    for (std::size_t k = rank; k-- > 0;) {
      const std::size_t ia = k + a.size() >= rank ? a[k + a.size() - rank] : 1;
      const std::size_t ib = k + b.size() >= rank ? b[k + b.size() - rank] : 1;
      if (ia != ib && ia != 1 && ib != 1) {
        throw ShapeError("cannot broadcast " + shape_string(a) + " with " +
                         shape_string(b));
      }
      out[k] = std::max(ia, ib);
      a_stride[k] = ia == 1 ? 0 : sa;
      b_stride[k] = ib == 1 ? 0 : sb;
      sa *= ia;
      sb *= ib;
    }
  }

  template <typename F>
  void for_each(F&& f) const {
    const std::size_t total = shape_size(out);
    if (same) {
      for (std::size_t i = 0; i < total; ++i) f(i, i, i);
      return;
    }
    const std::size_t rank = out.size();
    std::vector<std::size_t> idx(rank, 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < total; ++i) {
      f(i, ia, ib);
      for (std::size_t k = rank; k-- > 0;) {
        ++idx[k];
        ia += a_stride[k];
        ib += b_stride[k];
        if (idx[k] < out[k]) break;
        ia -= a_stride[k] * out[k];
        ib -= b_stride[k] * out[k];
        idx[k] = 0;
      }
    }
  }
};

enum class Binary { Add, Sub, Mul, Div };

template <typename T>
BasicVar<T> binary(Binary op, BasicVar<T> a, BasicVar<T> b) {
  auto& g = graph_of(a, b);
  auto av = g.shared_value(a);
  auto bv = g.shared_value(b);
  auto plan = std::make_shared<BroadcastPlan>(av->shape(), bv->shape());
  BasicTensor<T> out(plan->out.empty() ? Shape{} : plan->out);
  const T* pa = av->raw();
  const T* pb = bv->raw();
  T* po = out.raw();
  switch (op) {
    case Binary::Add:
      plan->for_each([&](auto i, auto j, auto k) { po[i] = pa[j] + pb[k]; });
      break;
    case Binary::Sub:
      plan->for_each([&](auto i, auto j, auto k) { po[i] = pa[j] - pb[k]; });
      break;
    case Binary::Mul:
      plan->for_each([&](auto i, auto j, auto k) { po[i] = pa[j] * pb[k]; });
      break;
    case Binary::Div:
      plan->for_each([&](auto i, auto j, auto k) { po[i] = pa[j] / pb[k]; });
      break;
  }
  static constexpr OpKind kinds[] = {OpKind::Add, OpKind::Sub, OpKind::Mul,
                                     OpKind::Div};
  return g.record(
      kinds[static_cast<int>(op)], {a, b}, std::move(out),
      [op, av, bv, plan](const BasicTensor<T>& go,
                         std::span<BasicTensor<T>* const> gi) {
        const T* g = go.raw();
        const T* pa = av->raw();
        const T* pb = bv->raw();
        T* ga = gi[0] ? gi[0]->raw() : nullptr;
        T* gb = gi[1] ? gi[1]->raw() : nullptr;
        plan->for_each([&](std::size_t i, std::size_t j, std::size_t k) {
          switch (op) {
            case Binary::Add:
              if (ga) ga[j] += g[i];
              if (gb) gb[k] += g[i];
              break;
            case Binary::Sub:
              if (ga) ga[j] += g[i];
              if (gb) gb[k] -= g[i];
              break;
            case Binary::Mul:
              if (ga) ga[j] += g[i] * pb[k];
              if (gb) gb[k] += g[i] * pa[j];
              break;
            case Binary::Div:
              if (ga) ga[j] += g[i] / pb[k];
              if (gb) gb[k] -= g[i] * pa[j] / (pb[k] * pb[k]);
              break;
          }
        });
      });
}

// Elementwise map with derivative expressed through input and output values.
template <typename T, typename Fwd, typename Deriv>
BasicVar<T> unary(OpKind kind, BasicVar<T> x, Fwd fwd, Deriv deriv) {
  auto& g = x.graph();
  auto xv = g.shared_value(x);
  auto yv = std::make_shared<BasicTensor<T>>(xv->shape());
  for (std::size_t i = 0; i < yv->size(); ++i) (*yv)[i] = fwd((*xv)[i]);
  return g.record(kind, {x}, std::shared_ptr<const BasicTensor<T>>(yv),
                  [xv, yv, deriv](const BasicTensor<T>& go,
                                  std::span<BasicTensor<T>* const> gi) {
                    T* gx = gi[0]->raw();
                    for (std::size_t i = 0; i < go.size(); ++i) {
                      gx[i] += go[i] * deriv((*xv)[i], (*yv)[i]);
                    }
                  });
}

// Splits a shape around `axis` into [outer, len, inner].
struct AxisView {
  std::size_t outer = 1, len = 1, inner = 1;
  AxisView(const Shape& s, std::size_t axis) {
    if (axis >= s.size()) {
      throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                       shape_string(s));
    }
    for (std::size_t k = 0; k < axis; ++k) outer *= s[k];
    len = s[axis];
    for (std::size_t k = axis + 1; k < s.size(); ++k) inner *= s[k];
  }
};

Shape reduced_shape(const Shape& s, std::size_t axis, bool keepdim) {
  Shape out = s;
  if (keepdim) {
    out[axis] = 1;
  } else {
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis));
  }
  return out;
}

template <typename T>
BasicVar<T> reduce_sum(OpKind kind, BasicVar<T> x, std::size_t axis,
                       bool keepdim, T factor) {
  auto& g = x.graph();
  const auto& xv = x.value();
  AxisView v(xv.shape(), axis);
  BasicTensor<T> out(reduced_shape(xv.shape(), axis, keepdim));
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t l = 0; l < v.len; ++l) {
      const T* src = xv.raw() + (o * v.len + l) * v.inner;
      T* dst = out.raw() + o * v.inner;
      for (std::size_t i = 0; i < v.inner; ++i) dst[i] += src[i];
    }
  }
  if (factor != T{1}) {
    for (auto& e : out.data()) e *= factor;
  }
  return g.record(kind, {x}, std::move(out),
                  [v, factor](const BasicTensor<T>& go,
                              std::span<BasicTensor<T>* const> gi) {
                    T* gx = gi[0]->raw();
                    for (std::size_t o = 0; o < v.outer; ++o) {
                      for (std::size_t l = 0; l < v.len; ++l) {
                        T* dst = gx + (o * v.len + l) * v.inner;
                        const T* src = go.raw() + o * v.inner;
                        for (std::size_t i = 0; i < v.inner; ++i) {
                          dst[i] += factor * src[i];
                        }
                      }
                    }
                  });
}

template <typename T>
BasicVar<T> reduce_extremum(OpKind kind, BasicVar<T> x, std::size_t axis,
                            bool keepdim) {
  const bool is_min = kind == OpKind::Min;
  auto& g = x.graph();
  const auto& xv = x.value();
  AxisView v(xv.shape(), axis);
  BasicTensor<T> out(reduced_shape(xv.shape(), axis, keepdim));
  auto arg = std::make_shared<std::vector<std::size_t>>(v.outer * v.inner);
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < v.inner; ++i) {
      std::size_t best_l = 0;
      T best = xv[o * v.len * v.inner + i];
      for (std::size_t l = 1; l < v.len; ++l) {
        const T c = xv[(o * v.len + l) * v.inner + i];
        if (is_min ? c < best : c > best) {
          best = c;
          best_l = l;
        }
      }
      out[o * v.inner + i] = best;
      (*arg)[o * v.inner + i] = (o * v.len + best_l) * v.inner + i;
    }
  }
  return g.record(kind, {x}, std::move(out),
                  [arg](const BasicTensor<T>& go,
                        std::span<BasicTensor<T>* const> gi) {
                    T* gx = gi[0]->raw();
                    for (std::size_t k = 0; k < arg->size(); ++k) {
                      gx[(*arg)[k]] += go[k];
                    }
                  });
}

template <typename T>
BasicVar<T> flatten(BasicVar<T> x) {
  return reshape(x, Shape{x.value().size()});
}

}  // namespace

template <typename T>
BasicVar<T> add(BasicVar<T> a, BasicVar<T> b) {
  return binary(Binary::Add, a, b);
}
template <typename T>
BasicVar<T> sub(BasicVar<T> a, BasicVar<T> b) {
  return binary(Binary::Sub, a, b);
}
template <typename T>
BasicVar<T> mul(BasicVar<T> a, BasicVar<T> b) {
  return binary(Binary::Mul, a, b);
}
template <typename T>
BasicVar<T> div(BasicVar<T> a, BasicVar<T> b) {
  return binary(Binary::Div, a, b);
}

template <typename T>
BasicVar<T> abs(BasicVar<T> x) {
  return unary(
      OpKind::Abs, x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > 0 ? T{1} : (v < 0 ? T{-1} : T{0}); });
}

template <typename T>
BasicVar<T> sqrt(BasicVar<T> x) {
  for (T v : x.value().data()) {
    if (v < 0) throw PreconditionError("sqrt of negative value");
  }
  return unary(
      OpKind::Sqrt, x, [](T v) { return std::sqrt(v); },
      [](T, T y) { return y > 0 ? T{0.5} / y : T{0}; });
}

template <typename T>
BasicVar<T> pow(BasicVar<T> x, T exponent) {
  return unary(
      OpKind::Pow, x, [exponent](T v) { return std::pow(v, exponent); },
      [exponent](T v, T) { return exponent * std::pow(v, exponent - T{1}); });
}

template <typename T>
BasicVar<T> relu(BasicVar<T> x) {
  return unary(
      OpKind::Relu, x, [](T v) { return v > 0 ? v : T{0}; },
      [](T v, T) { return v > 0 ? T{1} : T{0}; });
}

template <typename T>
BasicVar<T> scale(BasicVar<T> x, T factor) {
  return unary(
      OpKind::Scale, x, [factor](T v) { return v * factor; },
      [factor](T, T) { return factor; });
}

template <typename T>
BasicVar<T> add_scalar(BasicVar<T> x, T offset) {
  return unary(
      OpKind::AddScalar, x, [offset](T v) { return v + offset; },
      [](T, T) { return T{1}; });
}

template <typename T>
BasicVar<T> matmul(BasicVar<T> a, BasicVar<T> b, bool transpose_a,
                   bool transpose_b) {
  auto& g = graph_of(a, b);
  auto av = g.shared_value(a);
  auto bv = g.shared_value(b);
  if (av->rank() != 2 || bv->rank() != 2) {
    throw ShapeError("matmul expects rank-2 operands, got " +
                     shape_string(av->shape()) + " and " +
                     shape_string(bv->shape()));
  }
  const std::size_t ar = av->dim(0), ac = av->dim(1);
  const std::size_t br = bv->dim(0), bc = bv->dim(1);
  const std::size_t m = transpose_a ? ac : ar;
  const std::size_t k = transpose_a ? ar : ac;
  const std::size_t k2 = transpose_b ? bc : br;
  const std::size_t n = transpose_b ? br : bc;
  if (k != k2) {
    throw ShapeError("matmul inner dimensions differ: " +
                     shape_string(av->shape()) + " x " +
                     shape_string(bv->shape()));
  }
  BasicTensor<T> out(Shape{m, n});
  ConstMatMap<T> A(av->raw(), ar, ac);
  ConstMatMap<T> B(bv->raw(), br, bc);
  MatMap<T> C(out.raw(), m, n);
  if (!transpose_a && !transpose_b) C.noalias() = A * B;
  if (transpose_a && !transpose_b) C.noalias() = A.transpose() * B;
  if (!transpose_a && transpose_b) C.noalias() = A * B.transpose();
  if (transpose_a && transpose_b) C.noalias() = A.transpose() * B.transpose();

  return g.record(
      OpKind::MatMul, {a, b}, std::move(out),
      [av, bv, transpose_a, transpose_b, m, n](
          const BasicTensor<T>& go, std::span<BasicTensor<T>* const> gi) {
        const std::size_t ar = av->dim(0), ac = av->dim(1);
        const std::size_t br = bv->dim(0), bc = bv->dim(1);
        ConstMatMap<T> A(av->raw(), ar, ac);
        ConstMatMap<T> B(bv->raw(), br, bc);
        ConstMatMap<T> G(go.raw(), m, n);
        if (gi[0]) {
          MatMap<T> GA(gi[0]->raw(), ar, ac);
          // d op(A) = G * op(B)^T
          if (!transpose_a) {
            if (!transpose_b) GA.noalias() += G * B.transpose();
            else GA.noalias() += G * B;
          } else {
            if (!transpose_b) GA.noalias() += B * G.transpose();
            else GA.noalias() += B.transpose() * G.transpose();
          }
        }
        if (gi[1]) {
          MatMap<T> GB(gi[1]->raw(), br, bc);
          // d op(B) = op(A)^T * G
          if (!transpose_b) {
            if (!transpose_a) GB.noalias() += A.transpose() * G;
            else GB.noalias() += A * G;
          } else {
            if (!transpose_a) GB.noalias() += G.transpose() * A;
            else GB.noalias() += G.transpose() * A.transpose();
          }
        }
      });
}

template <typename T>
BasicVar<T> gram(BasicVar<T> x, GramSide side) {
  auto& g = x.graph();
  auto xv = g.shared_value(x);
  if (xv->rank() != 2) {
    throw ShapeError("gram expects a rank-2 operand, got " +
                     shape_string(xv->shape()));
  }
  const std::size_t r = xv->dim(0), c = xv->dim(1);
  const std::size_t k = side == GramSide::Rows ? r : c;
  BasicTensor<T> out(Shape{k, k});
  ConstMatMap<T> X(xv->raw(), r, c);
  MatMap<T> G(out.raw(), k, k);
  // Symmetric rank-k update computes one triangle; mirror it.
  if (side == GramSide::Rows) {
    G.template selfadjointView<Eigen::Lower>().rankUpdate(X);
  } else {
    G.template selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  }
  G.template triangularView<Eigen::StrictlyUpper>() = G.transpose();

  return g.record(OpKind::Gram, {x}, std::move(out),
                  [xv, side, k](const BasicTensor<T>& go,
                                std::span<BasicTensor<T>* const> gi) {
                    const std::size_t r = xv->dim(0), c = xv->dim(1);
                    ConstMatMap<T> X(xv->raw(), r, c);
                    ConstMatMap<T> G(go.raw(), k, k);
                    MatMap<T> GX(gi[0]->raw(), r, c);
                    RowMat<T> S = G + G.transpose();
                    if (side == GramSide::Rows) {
                      GX.noalias() += S * X;
                    } else {
                      GX.noalias() += X * S;
                    }
                  });
}

template <typename T>
BasicVar<T> row_normalize(BasicVar<T> x, T eps) {
  auto& g = x.graph();
  auto xv = g.shared_value(x);
  if (xv->rank() != 2) {
    throw ShapeError("row_normalize expects rank 2, got " +
                     shape_string(xv->shape()));
  }
  const std::size_t n = xv->dim(0), d = xv->dim(1);
  auto norms = std::make_shared<std::vector<T>>(n);
  BasicTensor<T> out(xv->shape());
  for (std::size_t i = 0; i < n; ++i) {
    const T* row = xv->raw() + i * d;
    T ss = 0;
    for (std::size_t j = 0; j < d; ++j) ss += row[j] * row[j];
    const T s = std::sqrt(ss);
    (*norms)[i] = s;
    const T inv = T{1} / (s + eps);
    T* dst = out.raw() + i * d;
    for (std::size_t j = 0; j < d; ++j) dst[j] = row[j] * inv;
  }
  return g.record(
      OpKind::RowNormalize, {x}, std::move(out),
      [xv, norms, eps, n, d](const BasicTensor<T>& go,
                             std::span<BasicTensor<T>* const> gi) {
        T* gx = gi[0]->raw();
        for (std::size_t i = 0; i < n; ++i) {
          const T* row = xv->raw() + i * d;
          const T* gr = go.raw() + i * d;
          const T s = (*norms)[i];
          const T r = s + eps;
          T dot = 0;
          for (std::size_t j = 0; j < d; ++j) dot += gr[j] * row[j];
          const T coef = s > 0 ? dot / (s * r * r) : T{0};
          T* dst = gx + i * d;
          for (std::size_t j = 0; j < d; ++j) {
            dst[j] += gr[j] / r - coef * row[j];
          }
        }
      });
}

template <typename T>
BasicVar<T> pairwise_distance(BasicVar<T> a, BasicVar<T> b) {
  auto& g = graph_of(a, b);
  auto av = g.shared_value(a);
  auto bv = g.shared_value(b);
  if (av->rank() != 2 || bv->rank() != 2 || av->dim(1) != bv->dim(1)) {
    throw ShapeError("pairwise_distance expects [n,d] and [m,d], got " +
                     shape_string(av->shape()) + " and " +
                     shape_string(bv->shape()));
  }
  const std::size_t n = av->dim(0), m = bv->dim(0), d = av->dim(1);
  auto dist = std::make_shared<BasicTensor<T>>(Shape{n, m});
  auto& out = *dist;
  // |a|^2 + |b|^2 - 2ab in double through one GEMM. Pairs closer than
  // kNearPair of their squared norms would cancel badly; redo those directly.
  constexpr double kNearPair = 1e-4;
  using MatD = RowMat<double>;
  const MatD A = ConstMatMap<T>(av->raw(), n, d).template cast<double>();
  const MatD B = ConstMatMap<T>(bv->raw(), m, d).template cast<double>();
  const Eigen::VectorXd na = A.rowwise().squaredNorm(), nb = B.rowwise().squaredNorm();
  MatD dots(n, m);
  dots.noalias() = A * B.transpose();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double ss = na[i] + nb[j] - 2 * dots(i, j);
      if (ss < kNearPair * (na[i] + nb[j])) {
        ss = 0;
        for (std::size_t k = 0; k < d; ++k) {
          const double diff = A(i, k) - B(j, k);
          ss += diff * diff;
        }
      }
      out[i * m + j] = static_cast<T>(std::sqrt(ss));
    }
  }
  return g.record(
      OpKind::PairwiseDistance, {a, b}, std::shared_ptr<const BasicTensor<T>>(dist),
      [av, bv, dist, n, m, d](const BasicTensor<T>& go,
                              std::span<BasicTensor<T>* const> gi) {
        T* ga = gi[0] ? gi[0]->raw() : nullptr;
        T* gb = gi[1] ? gi[1]->raw() : nullptr;
        for (std::size_t i = 0; i < n; ++i) {
          const T* ai = av->raw() + i * d;
          for (std::size_t j = 0; j < m; ++j) {
            const T dij = (*dist)[i * m + j];
            if (dij <= 0) continue;
            const T w = go[i * m + j] / dij;
            if (w == 0) continue;
            const T* bj = bv->raw() + j * d;
            for (std::size_t k = 0; k < d; ++k) {
              const T diff = w * (ai[k] - bj[k]);
              if (ga) ga[i * d + k] += diff;
              if (gb) gb[j * d + k] -= diff;
            }
          }
        }
      });
}

template <typename T>
BasicVar<T> sum(BasicVar<T> x) {
  return reshape(reduce_sum(OpKind::Sum, flatten(x), 0, false, T{1}), Shape{});
}

template <typename T>
BasicVar<T> mean(BasicVar<T> x) {
  const T f = T{1} / static_cast<T>(x.value().size());
  return reshape(reduce_sum(OpKind::Mean, flatten(x), 0, false, f), Shape{});
}

template <typename T>
BasicVar<T> min(BasicVar<T> x) {
  return reshape(reduce_extremum(OpKind::Min, flatten(x), 0, false), Shape{});
}

template <typename T>
BasicVar<T> max(BasicVar<T> x) {
  return reshape(reduce_extremum(OpKind::Max, flatten(x), 0, false), Shape{});
}

template <typename T>
BasicVar<T> sum(BasicVar<T> x, std::size_t axis, bool keepdim) {
  return reduce_sum(OpKind::Sum, x, axis, keepdim, T{1});
}

template <typename T>
BasicVar<T> mean(BasicVar<T> x, std::size_t axis, bool keepdim) {
  AxisView v(x.shape(), axis);
  return reduce_sum(OpKind::Mean, x, axis, keepdim,
                    T{1} / static_cast<T>(v.len));
}

template <typename T>
BasicVar<T> min(BasicVar<T> x, std::size_t axis, bool keepdim) {
  return reduce_extremum(OpKind::Min, x, axis, keepdim);
}

template <typename T>
BasicVar<T> max(BasicVar<T> x, std::size_t axis, bool keepdim) {
  return reduce_extremum(OpKind::Max, x, axis, keepdim);
}

template <typename T>
BasicVar<T> concat(std::span<const BasicVar<T>> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  auto& g = parts.front().graph();
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) {
    throw ShapeError("concat axis out of range for " + shape_string(first));
  }
  std::vector<std::size_t> lens;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (&p.graph() != &g) throw StateError("concat across graphs");
    const Shape& s = p.shape();
    if (s.size() != first.size()) {
      throw ShapeError("concat rank mismatch");
    }
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (k != axis && s[k] != first[k]) {
        throw ShapeError("concat extent mismatch: " + shape_string(s) +
                         " vs " + shape_string(first));
      }
    }
    lens.push_back(s[axis]);
    total += s[axis];
  }
  Shape out_shape = first;
  out_shape[axis] = total;
  AxisView ov(out_shape, axis);
  BasicTensor<T> out(out_shape);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& v = parts[p].value();
    const std::size_t block = lens[p] * ov.inner;
    for (std::size_t o = 0; o < ov.outer; ++o) {
      std::copy_n(v.raw() + o * block, block,
                  out.raw() + (o * ov.len + offset) * ov.inner);
    }
    offset += lens[p];
  }
  return g.record(OpKind::Concat, parts, std::move(out),
                  [lens, ov](const BasicTensor<T>& go,
                             std::span<BasicTensor<T>* const> gi) {
                    std::size_t offset = 0;
                    for (std::size_t p = 0; p < lens.size(); ++p) {
                      const std::size_t block = lens[p] * ov.inner;
                      if (gi[p]) {
                        T* dst = gi[p]->raw();
                        for (std::size_t o = 0; o < ov.outer; ++o) {
                          const T* src =
                              go.raw() + (o * ov.len + offset) * ov.inner;
                          for (std::size_t i = 0; i < block; ++i) {
                            dst[o * block + i] += src[i];
                          }
                        }
                      }
                      offset += lens[p];
                    }
                  });
}

template <typename T>
BasicVar<T> reshape(BasicVar<T> x, Shape shape) {
  const auto& xv = x.value();
  if (shape_size(shape) != xv.size()) {
    throw ShapeError("cannot reshape " + shape_string(xv.shape()) + " to " +
                     shape_string(shape));
  }
  return x.graph().record(OpKind::Reshape, {x}, xv.reshaped(std::move(shape)),
                          [](const BasicTensor<T>& go,
                             std::span<BasicTensor<T>* const> gi) {
                            T* gx = gi[0]->raw();
                            for (std::size_t i = 0; i < go.size(); ++i) {
                              gx[i] += go[i];
                            }
                          });
}

template <typename T>
BasicVar<T> transpose(BasicVar<T> x) {
  const auto& xv = x.value();
  if (xv.rank() != 2) {
    throw ShapeError("transpose expects a rank-2 tensor, got " + shape_string(xv.shape()));
  }
  const std::size_t n = xv.dim(0), m = xv.dim(1);
  BasicTensor<T> out({m, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = xv[i * m + j];
  return x.graph().record(OpKind::Transpose, {x}, std::move(out),
                          [n, m](const BasicTensor<T>& go,
                                 std::span<BasicTensor<T>* const> gi) {
                            T* gx = gi[0]->raw();
                            for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < m; ++j) gx[i * m + j] += go[j * n + i];
                          });
}

#define STROTSS_INSTANTIATE_OPS(T)                                            \
  template BasicVar<T> add(BasicVar<T>, BasicVar<T>);                         \
  template BasicVar<T> sub(BasicVar<T>, BasicVar<T>);                         \
  template BasicVar<T> mul(BasicVar<T>, BasicVar<T>);                         \
  template BasicVar<T> div(BasicVar<T>, BasicVar<T>);                         \
  template BasicVar<T> abs(BasicVar<T>);                                      \
  template BasicVar<T> sqrt(BasicVar<T>);                                     \
  template BasicVar<T> pow(BasicVar<T>, T);                                   \
  template BasicVar<T> relu(BasicVar<T>);                                     \
  template BasicVar<T> scale(BasicVar<T>, T);                                 \
  template BasicVar<T> add_scalar(BasicVar<T>, T);                            \
  template BasicVar<T> matmul(BasicVar<T>, BasicVar<T>, bool, bool);          \
  template BasicVar<T> gram(BasicVar<T>, GramSide);                           \
  template BasicVar<T> row_normalize(BasicVar<T>, T);                         \
  template BasicVar<T> pairwise_distance(BasicVar<T>, BasicVar<T>);           \
  template BasicVar<T> sum(BasicVar<T>);                                      \
  template BasicVar<T> mean(BasicVar<T>);                                     \
  template BasicVar<T> min(BasicVar<T>);                                      \
  template BasicVar<T> max(BasicVar<T>);                                      \
  template BasicVar<T> sum(BasicVar<T>, std::size_t, bool);                   \
  template BasicVar<T> mean(BasicVar<T>, std::size_t, bool);                  \
  template BasicVar<T> min(BasicVar<T>, std::size_t, bool);                   \
  template BasicVar<T> max(BasicVar<T>, std::size_t, bool);                   \
  template BasicVar<T> concat(std::span<const BasicVar<T>>, std::size_t);     \
  template BasicVar<T> reshape(BasicVar<T>, Shape);                           \
  template BasicVar<T> transpose(BasicVar<T>);

STROTSS_INSTANTIATE_OPS(float)
STROTSS_INSTANTIATE_OPS(double)

}  // namespace strotss
