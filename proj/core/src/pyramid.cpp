#include "strotss/pyramid.hpp"

#include "strotss/image_ops.hpp"
#include "strotss/ops.hpp"

namespace strotss {
namespace {

template <typename T>
void check_image(const BasicTensor<T>& image) {
  if (image.rank() != 3) {
    throw ShapeError("pyramid expects [C,H,W], got " + shape_string(image.shape()));
  }
}

}  // namespace

std::size_t supported_levels(Extent extent, std::size_t wanted) {
  std::size_t levels = 1;
  while (levels < wanted && (extent.height >> levels) >= 1 && (extent.width >> levels) >= 1) {
    ++levels;
  }
  return levels;
}

template <typename T>
BasicTensor<T> downsample(const BasicTensor<T>& image) {
  check_image(image);
  return resize_bilinear(image, (image.dim(1) + 1) / 2, (image.dim(2) + 1) / 2);
}

template <typename T>
BasicLaplacianPyramid<T> decompose(const BasicTensor<T>& image, std::size_t levels) {
  check_image(image);
  if (levels == 0) throw PreconditionError("pyramid needs at least one level");
  const Extent e{image.dim(1), image.dim(2)};
  if (supported_levels(e, levels) < levels) {
    throw PreconditionError("image " + std::to_string(e.height) + "x" +
                            std::to_string(e.width) + " is too small for " +
                            std::to_string(levels) + " pyramid levels");
  }
  BasicLaplacianPyramid<T> pyr;
  BasicTensor<T> current = image;
  for (std::size_t k = 0; k + 1 < levels; ++k) {
    BasicTensor<T> lower = downsample(current);
    const BasicTensor<T> up = resize_bilinear(lower, current.dim(1), current.dim(2));
    for (std::size_t i = 0; i < current.size(); ++i) current[i] -= up[i];
    pyr.levels.push_back(std::move(current));
    current = std::move(lower);
  }
  pyr.levels.push_back(std::move(current));
  return pyr;
}

template <typename T>
BasicTensor<T> reconstruct(const BasicLaplacianPyramid<T>& pyramid) {
  if (pyramid.levels.empty()) throw PreconditionError("empty pyramid");
  BasicTensor<T> x = pyramid.levels.back();
  for (std::size_t k = pyramid.levels.size() - 1; k-- > 0;) {
    const BasicTensor<T>& band = pyramid.levels[k];
    check_image(band);
    if (band.dim(0) != x.dim(0)) throw ShapeError("pyramid channel mismatch");
    x = resize_bilinear(x, band.dim(1), band.dim(2));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += band[i];
  }
  return x;
}

template <typename T>
BasicVar<T> reconstruct(std::span<const BasicVar<T>> levels) {
  if (levels.empty()) throw PreconditionError("empty pyramid");
  BasicVar<T> x = levels.back();
  for (std::size_t k = levels.size() - 1; k-- > 0;) {
    const Shape& s = levels[k].shape();
    if (s.size() != 3 || s[0] != x.shape()[0]) {
      throw ShapeError("pyramid level " + std::to_string(k) + " has shape " +
                       shape_string(s));
    }
    x = bilinear_resize(x, s[1], s[2]) + levels[k];
  }
  return x;
}

#define STROTSS_INSTANTIATE(T)                                                    \
  template BasicTensor<T> downsample(const BasicTensor<T>&);                      \
  template BasicLaplacianPyramid<T> decompose(const BasicTensor<T>&, std::size_t); \
  template BasicTensor<T> reconstruct(const BasicLaplacianPyramid<T>&);           \
  template BasicVar<T> reconstruct(std::span<const BasicVar<T>>);

STROTSS_INSTANTIATE(float)
STROTSS_INSTANTIATE(double)
#undef STROTSS_INSTANTIATE

}  // namespace strotss
