#pragma once

#include <span>

#include "strotss/graph.hpp"

namespace strotss {

// 3x3 cross-correlation, stride 1, zero padding 1.
// input [Cin,H,W], kernel [Cout,Cin,3,3], bias [Cout] -> [Cout,H,W].
template <typename T>
BasicVar<T> conv2d(BasicVar<T> input, BasicVar<T> kernel, BasicVar<T> bias);

// 2x2 stride-2 max pooling -> [C, ceil(H/2), ceil(W/2)]. An odd trailing
// row/column is replicated, which reduces to a max over the valid taps.
template <typename T>
BasicVar<T> maxpool2(BasicVar<T> input);

// Separable bilinear resampling with half-pixel-center alignment:
// source = (dst + 0.5) * in / out - 0.5, clamped to the valid range.
template <typename T>
BasicVar<T> bilinear_resize(BasicVar<T> input, std::size_t out_height,
                            std::size_t out_width);

// Bilinear interpolation at arbitrary (y,x) positions -> [n, C]. Every
// coordinate must lie in [0,H-1] x [0,W-1].
template <typename T>
BasicVar<T> bilinear_sample(BasicVar<T> input, std::span<const Coord> coords);

// Graph-free versions sharing the exact arithmetic of the ops above.
template <typename T>
BasicTensor<T> resize_bilinear(const BasicTensor<T>& input,
                               std::size_t out_height, std::size_t out_width);
template <typename T>
BasicTensor<T> sample_bilinear(const BasicTensor<T>& input,
                               std::span<const Coord> coords);

}  // namespace strotss
