#pragma once

#include <vector>

#include "strotss/random.hpp"
#include "strotss/tensor.hpp"

namespace strotss {

inline constexpr std::size_t kDefaultSampleCount = 1024;

// n distinct integer pixel coordinates drawn uniformly without replacement.
std::vector<Coord> sample_style_coords(std::size_t height, std::size_t width,
                                       std::size_t n, Rng& rng);

struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Near-square grid with rows * cols >= n whose aspect follows the image.
GridShape content_grid_shape(std::size_t height, std::size_t width, std::size_t n);

// Grid points floor(offset + i * spacing), spacing = (H/rows, W/cols),
// truncated to the first n in scan order. Offsets lie in [0, spacing).
std::vector<Coord> content_grid(std::size_t height, std::size_t width, std::size_t n,
                                double offset_y, double offset_x);

// content_grid with a random shared offset.
std::vector<Coord> sample_content_coords(std::size_t height, std::size_t width,
                                         std::size_t n, Rng& rng);

}  // namespace strotss
