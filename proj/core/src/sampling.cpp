#include "strotss/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace strotss {
namespace {

void check_count(std::size_t height, std::size_t width, std::size_t n) {
  if (height == 0 || width == 0) throw PreconditionError("empty image");
  if (n == 0) throw PreconditionError("sample count must be positive");
  if (n > height * width) {
    throw PreconditionError("cannot draw " + std::to_string(n) + " samples from " +
                            std::to_string(height) + "x" + std::to_string(width) +
                            " pixels");
  }
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

std::vector<Coord> sample_style_coords(std::size_t height, std::size_t width,
                                       std::size_t n, Rng& rng) {
  check_count(height, width, n);
  const std::size_t total = height * width;
  std::vector<std::uint32_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0u);
  std::vector<Coord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(total - i));
    std::swap(idx[i], idx[j]);
    out[i] = {static_cast<double>(idx[i] / width), static_cast<double>(idx[i] % width)};
  }
  return out;
}

GridShape content_grid_shape(std::size_t height, std::size_t width, std::size_t n) {
  check_count(height, width, n);
  const double ideal = std::sqrt(static_cast<double>(n) * static_cast<double>(height) /
                                 static_cast<double>(width));
  std::size_t rows = static_cast<std::size_t>(std::llround(ideal));
  rows = std::clamp<std::size_t>(rows, 1, height);
  std::size_t cols = ceil_div(n, rows);
  if (cols > width) {
    cols = width;
    rows = ceil_div(n, width);
  }
  return {rows, cols};
}

std::vector<Coord> content_grid(std::size_t height, std::size_t width, std::size_t n,
                                double offset_y, double offset_x) {
  const GridShape g = content_grid_shape(height, width, n);
  const double sy = static_cast<double>(height) / static_cast<double>(g.rows);
  const double sx = static_cast<double>(width) / static_cast<double>(g.cols);
  if (!(offset_y >= 0.0 && offset_y < sy && offset_x >= 0.0 && offset_x < sx)) {
    throw PreconditionError("grid offset outside [0, spacing)");
  }
  auto place = [](double offset, std::size_t i, double spacing, std::size_t limit) {
    const double v = std::floor(offset + static_cast<double>(i) * spacing);
    return std::min(v, static_cast<double>(limit - 1));
  };
  std::vector<Coord> out;
  out.reserve(n);
  for (std::size_t r = 0; r < g.rows && out.size() < n; ++r) {
    const double y = place(offset_y, r, sy, height);
    for (std::size_t c = 0; c < g.cols && out.size() < n; ++c) {
      out.push_back({y, place(offset_x, c, sx, width)});
    }
  }
  return out;
}

std::vector<Coord> sample_content_coords(std::size_t height, std::size_t width,
                                         std::size_t n, Rng& rng) {
  const GridShape g = content_grid_shape(height, width, n);
  const double sy = static_cast<double>(height) / static_cast<double>(g.rows);
  const double sx = static_cast<double>(width) / static_cast<double>(g.cols);
  const double oy = std::min(rng.uniform() * sy, std::nextafter(sy, 0.0));
  const double ox = std::min(rng.uniform() * sx, std::nextafter(sx, 0.0));
  return content_grid(height, width, n, oy, ox);
}

}  // namespace strotss
