#pragma once

#include <span>
#include <vector>

#include "strotss/tensor.hpp"

namespace strotss {

struct RmspropConfig {
  double rho = 0.99;
  double eps = 1e-8;
};

// Per-parameter running mean of squared gradients.
struct RmspropState {
  RmspropConfig config;
  std::vector<Tensor> second_moment;
  std::size_t steps = 0;

  static RmspropState for_params(std::span<const Tensor> params,
                                 RmspropConfig config = {});
};

// v <- rho v + (1 - rho) g^2;  p <- p - lr g / (sqrt(v) + eps).
void rmsprop_step(std::span<Tensor> params, std::span<const Tensor> grads,
                  RmspropState& state, double learning_rate);

}  // namespace strotss
