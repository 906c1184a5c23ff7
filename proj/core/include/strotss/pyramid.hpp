#pragma once

#include <span>
#include <vector>

#include "strotss/graph.hpp"

namespace strotss {

inline constexpr std::size_t kDefaultPyramidLevels = 5;

// Band-pass decomposition of a [C,H,W] image. levels[0] is the finest
// (full-resolution) detail band; levels.back() is the low-pass residual.
// Level k has dims ceil(H/2^k) x ceil(W/2^k).
template <typename T>
struct BasicLaplacianPyramid {
  std::vector<BasicTensor<T>> levels;

  std::size_t level_count() const noexcept { return levels.size(); }
};
using LaplacianPyramid = BasicLaplacianPyramid<float>;

// Largest level count (capped at `wanted`) such that H,W >= 2^(levels-1).
std::size_t supported_levels(Extent extent, std::size_t wanted = kDefaultPyramidLevels);

// Bilinear half-resolution resize with ceil dims.
template <typename T>
BasicTensor<T> downsample(const BasicTensor<T>& image);

template <typename T>
BasicLaplacianPyramid<T> decompose(const BasicTensor<T>& image, std::size_t levels);

template <typename T>
BasicTensor<T> reconstruct(const BasicLaplacianPyramid<T>& pyramid);

// Differentiable reconstruction from one variable per level.
template <typename T>
BasicVar<T> reconstruct(std::span<const BasicVar<T>> levels);

}  // namespace strotss
