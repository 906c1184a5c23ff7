#include "strotss/rmsprop.hpp"

#include <cmath>

namespace strotss {

RmspropState RmspropState::for_params(std::span<const Tensor> params,
                                      RmspropConfig config) {
  if (!(config.rho >= 0.0 && config.rho < 1.0) || !(config.eps > 0.0)) {
    throw PreconditionError("rmsprop needs 0 <= rho < 1 and eps > 0");
  }
  RmspropState state{config, {}, 0};
  for (const Tensor& p : params) state.second_moment.emplace_back(p.shape(), 0.0f);
  return state;
}

void rmsprop_step(std::span<Tensor> params, std::span<const Tensor> grads,
                  RmspropState& state, double learning_rate) {
  if (params.size() != grads.size() || params.size() != state.second_moment.size()) {
    throw ShapeError("rmsprop parameter, gradient and state counts differ");
  }
  const float rho = static_cast<float>(state.config.rho);
  const float keep = static_cast<float>(1.0 - state.config.rho);
  const float eps = static_cast<float>(state.config.eps);
  const float lr = static_cast<float>(learning_rate);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    const Tensor& g = grads[k];
    Tensor& v = state.second_moment[k];
    if (p.shape() != g.shape() || p.shape() != v.shape()) {
      throw ShapeError("rmsprop shape mismatch for parameter " + std::to_string(k));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = rho * v[i] + keep * g[i] * g[i];
      p[i] -= lr * g[i] / (std::sqrt(v[i]) + eps);
    }
  }
  ++state.steps;
}

}  // namespace strotss
