#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "strotss/tensor.hpp"

namespace strotss {

enum class OpKind : std::uint8_t {
  Leaf,
  Constant,
  Add,
  Sub,
  Mul,
  Div,
  Abs,
  Sqrt,
  Pow,
  Relu,
  Scale,
  AddScalar,
  MatMul,
  Gram,
  RowNormalize,
  PairwiseDistance,
  Sum,
  Mean,
  Min,
  Max,
  Concat,
  Reshape,
  Transpose,
  Conv2d,
  MaxPool2,
  BilinearResize,
  BilinearSample,
};

std::string_view op_name(OpKind kind);

template <typename T>
class BasicGraph;

// Handle to one node of a BasicGraph. Cheap to copy; only valid while the
// owning graph is alive.
template <typename T>
class BasicVar {
 public:
  BasicVar() = default;
  BasicVar(BasicGraph<T>* graph, std::uint32_t id) : graph_(graph), id_(id) {}

  bool valid() const noexcept { return graph_ != nullptr; }
  BasicGraph<T>& graph() const { return *graph_; }
  std::uint32_t id() const noexcept { return id_; }

  const BasicTensor<T>& value() const { return graph_->value(*this); }
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const { return graph_->requires_grad(*this); }
  T item() const { return value().item(); }

 private:
  BasicGraph<T>* graph_ = nullptr;
  std::uint32_t id_ = 0;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so the node list
// is already topologically sorted; backward walks it once in reverse.
//
// A graph supports exactly one backward pass. Build a fresh graph for each
// forward evaluation.
template <typename T>
class BasicGraph {
 public:
  using TensorType = BasicTensor<T>;
  using Var = BasicVar<T>;
  using ValuePtr = std::shared_ptr<const TensorType>;
  // Called with the node's output gradient and one slot per input. A slot is
  // nullptr when that input does not need a gradient; otherwise it points at
  // a zero-initialised (or partially accumulated) buffer to add into.
  using BackwardFn =
      std::function<void(const TensorType& grad_out,
                         std::span<TensorType* const> grad_in)>;

  BasicGraph() = default;
  BasicGraph(const BasicGraph&) = delete;
  BasicGraph& operator=(const BasicGraph&) = delete;

  Var leaf(TensorType value, bool requires_grad = true);
  Var constant(TensorType value);
  // Shares storage with the caller; used for network weights and cached
  // activations that are reused across many graphs.
  Var constant(ValuePtr value);

  // Appends an operation node. The node requires a gradient iff any input
  // does; if none does, `backward` is discarded.
  Var record(OpKind kind, std::span<const Var> inputs, ValuePtr value,
             BackwardFn backward);
  Var record(OpKind kind, std::span<const Var> inputs, TensorType value,
             BackwardFn backward) {
    return record(kind, inputs, std::make_shared<const TensorType>(std::move(value)),
                  std::move(backward));
  }
  template <typename V>
  Var record(OpKind kind, std::initializer_list<Var> inputs, V&& value,
             BackwardFn backward) {
    return record(kind, std::span<const Var>(inputs.begin(), inputs.size()),
                  std::forward<V>(value), std::move(backward));
  }

  const TensorType& value(Var v) const { return *node(v).value; }
  ValuePtr shared_value(Var v) const { return node(v).value; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  OpKind kind(Var v) const { return node(v).kind; }
  std::span<const std::uint32_t> inputs(Var v) const { return node(v).inputs; }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  // Propagates d(root)/d(leaf) to every leaf that requires a gradient.
  void backward(Var root);
  bool backward_done() const noexcept { return backward_done_; }

  // Gradient of a requires-grad leaf. Throws StateError before backward.
  const TensorType& grad(Var v) const;
  TensorType take_grad(Var v);

 private:
  struct Node {
    OpKind kind = OpKind::Leaf;
    std::vector<std::uint32_t> inputs;
    ValuePtr value;
    TensorType grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

using Graph = BasicGraph<float>;
using Var = BasicVar<float>;

extern template class BasicGraph<float>;
extern template class BasicGraph<double>;

}  // namespace strotss
