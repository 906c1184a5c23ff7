#include "strotss/graph.hpp"

#include <string>

namespace strotss {

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::Leaf: return "leaf";
    case OpKind::Constant: return "constant";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::Div: return "div";
    case OpKind::Abs: return "abs";
    case OpKind::Sqrt: return "sqrt";
    case OpKind::Pow: return "pow";
    case OpKind::Relu: return "relu";
    case OpKind::Scale: return "scale";
    case OpKind::AddScalar: return "add_scalar";
    case OpKind::MatMul: return "matmul";
    case OpKind::Gram: return "gram";
    case OpKind::RowNormalize: return "row_normalize";
    case OpKind::PairwiseDistance: return "pairwise_distance";
    case OpKind::Sum: return "sum";
    case OpKind::Mean: return "mean";
    case OpKind::Min: return "min";
    case OpKind::Max: return "max";
    case OpKind::Concat: return "concat";
    case OpKind::Reshape: return "reshape";
    case OpKind::Transpose: return "transpose";
    case OpKind::Conv2d: return "conv2d";
    case OpKind::MaxPool2: return "maxpool2";
    case OpKind::BilinearResize: return "bilinear_resize";
    case OpKind::BilinearSample: return "bilinear_sample";
  }
  return "unknown";
}

template <typename T>
auto BasicGraph<T>::node(Var v) const -> const Node& {
  if (&v.graph() != this || v.id() >= nodes_.size()) {
    throw StateError("variable does not belong to this graph");
  }
  return nodes_[v.id()];
}

template <typename T>
auto BasicGraph<T>::node(Var v) -> Node& {
  return const_cast<Node&>(std::as_const(*this).node(v));
}

template <typename T>
auto BasicGraph<T>::leaf(TensorType value, bool requires_grad) -> Var {
  Node n;
  n.kind = OpKind::Leaf;
  n.value = std::make_shared<const TensorType>(std::move(value));
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <typename T>
auto BasicGraph<T>::constant(TensorType value) -> Var {
  return constant(std::make_shared<const TensorType>(std::move(value)));
}

template <typename T>
auto BasicGraph<T>::constant(ValuePtr value) -> Var {
  Node n;
  n.kind = OpKind::Constant;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <typename T>
auto BasicGraph<T>::record(OpKind kind, std::span<const Var> inputs,
                           ValuePtr value, BackwardFn backward) -> Var {
  if (backward_done_) {
    throw StateError("cannot extend a graph after backward");
  }
  Node n;
  n.kind = kind;
  n.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    const Node& src = node(in);
    n.inputs.push_back(in.id());
    n.requires_grad = n.requires_grad || src.requires_grad;
  }
  n.value = std::move(value);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <typename T>
void BasicGraph<T>::backward(Var root) {
  if (backward_done_) {
    throw StateError("backward already ran on this graph");
  }
  Node& r = node(root);
  if (r.value->size() != 1) {
    throw PreconditionError("backward root must be a scalar, got shape " +
                            shape_string(r.value->shape()));
  }
  backward_done_ = true;
  r.grad = TensorType(r.value->shape(), T{1});

  std::vector<TensorType*> slots;
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      slots.assign(n.inputs.size(), nullptr);
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        Node& in = nodes_[n.inputs[k]];
        if (!in.requires_grad) continue;
        if (in.grad.empty()) in.grad = TensorType(in.value->shape(), T{0});
        slots[k] = &in.grad;
      }
      n.backward(n.grad, slots);
    }
    if (n.kind != OpKind::Leaf) {
      // Interior gradients and saved closures are no longer needed.
      n.grad = TensorType();
      n.backward = nullptr;
    }
  }
  for (Node& n : nodes_) {
    if (n.kind == OpKind::Leaf && n.requires_grad && n.grad.empty()) {
      n.grad = TensorType(n.value->shape(), T{0});
    }
  }
}

template <typename T>
auto BasicGraph<T>::grad(Var v) const -> const TensorType& {
  const Node& n = node(v);
  if (!backward_done_) {
    throw StateError("gradient requested before backward");
  }
  if (n.kind != OpKind::Leaf || !n.requires_grad) {
    throw StateError("gradients are kept only for requires-grad leaves");
  }
  return n.grad;
}

template <typename T>
auto BasicGraph<T>::take_grad(Var v) -> TensorType {
  grad(v);
  return std::move(node(v).grad);
}

template class BasicGraph<float>;
template class BasicGraph<double>;

}  // namespace strotss
