#pragma once

#include <span>
#include <vector>

#include "strotss/graph.hpp"

// Differentiable primitives. Every function appends one node to the graph
// that owns its inputs. Binary elementwise ops broadcast with numpy rules.
namespace strotss {

template <typename T> BasicVar<T> add(BasicVar<T> a, BasicVar<T> b);
template <typename T> BasicVar<T> sub(BasicVar<T> a, BasicVar<T> b);
template <typename T> BasicVar<T> mul(BasicVar<T> a, BasicVar<T> b);
template <typename T> BasicVar<T> div(BasicVar<T> a, BasicVar<T> b);

template <typename T> BasicVar<T> abs(BasicVar<T> x);
// Derivative at 0 is taken as 0.
template <typename T> BasicVar<T> sqrt(BasicVar<T> x);
template <typename T> BasicVar<T> pow(BasicVar<T> x, T exponent);
template <typename T> BasicVar<T> relu(BasicVar<T> x);
template <typename T> BasicVar<T> scale(BasicVar<T> x, T factor);
template <typename T> BasicVar<T> add_scalar(BasicVar<T> x, T offset);

// op(a) * op(b) for rank-2 operands, op = transpose when the flag is set.
template <typename T>
BasicVar<T> matmul(BasicVar<T> a, BasicVar<T> b, bool transpose_a = false,
                   bool transpose_b = false);

enum class GramSide { Rows, Cols };
// x * x^T (Rows, [n,d] -> [n,n]) or x^T * x (Cols, [n,d] -> [d,d]).
template <typename T> BasicVar<T> gram(BasicVar<T> x, GramSide side);

// Each row divided by (its L2 norm + eps).
template <typename T> BasicVar<T> row_normalize(BasicVar<T> x, T eps);

// D[i][j] = ||a_i - b_j||_2 for rank-2 a [n,d] and b [m,d]. The subgradient
// at coincident rows is 0.
template <typename T>
BasicVar<T> pairwise_distance(BasicVar<T> a, BasicVar<T> b);

// Full reductions return a rank-0 scalar.
template <typename T> BasicVar<T> sum(BasicVar<T> x);
template <typename T> BasicVar<T> mean(BasicVar<T> x);
template <typename T> BasicVar<T> min(BasicVar<T> x);
template <typename T> BasicVar<T> max(BasicVar<T> x);

// Axis reductions. min/max send the gradient to the lowest index on ties.
template <typename T>
BasicVar<T> sum(BasicVar<T> x, std::size_t axis, bool keepdim = false);
template <typename T>
BasicVar<T> mean(BasicVar<T> x, std::size_t axis, bool keepdim = false);
template <typename T>
BasicVar<T> min(BasicVar<T> x, std::size_t axis, bool keepdim = false);
template <typename T>
BasicVar<T> max(BasicVar<T> x, std::size_t axis, bool keepdim = false);

template <typename T>
BasicVar<T> concat(std::span<const BasicVar<T>> parts, std::size_t axis = 1);
template <typename T> BasicVar<T> reshape(BasicVar<T> x, Shape shape);
// Rank-2 transpose.
template <typename T> BasicVar<T> transpose(BasicVar<T> x);

template <typename T>
BasicVar<T> operator+(BasicVar<T> a, BasicVar<T> b) { return add(a, b); }
template <typename T>
BasicVar<T> operator-(BasicVar<T> a, BasicVar<T> b) { return sub(a, b); }
template <typename T>
BasicVar<T> operator*(BasicVar<T> a, BasicVar<T> b) { return mul(a, b); }
template <typename T>
BasicVar<T> operator/(BasicVar<T> a, BasicVar<T> b) { return div(a, b); }
template <typename T>
BasicVar<T> operator-(BasicVar<T> a) { return scale(a, T{-1}); }
template <typename T>
BasicVar<T> operator*(BasicVar<T> a, T s) { return scale(a, s); }
template <typename T>
BasicVar<T> operator*(T s, BasicVar<T> a) { return scale(a, s); }
template <typename T>
BasicVar<T> operator+(BasicVar<T> a, T s) { return add_scalar(a, s); }
template <typename T>
BasicVar<T> operator+(T s, BasicVar<T> a) { return add_scalar(a, s); }

}  // namespace strotss
