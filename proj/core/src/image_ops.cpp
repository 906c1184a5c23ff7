#include "strotss/image_ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace strotss {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Strided = Eigen::OuterStride<>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Strided>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Strided>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;

// Output pixels per im2col tile; bounds the column buffer for large images.
constexpr std::size_t kConvTilePixels = 4096;

void require_rank3(const Shape& s, const char* what) {
  if (s.size() != 3) {
    throw ShapeError(std::string(what) + " expects a [C,H,W] tensor, got " +
                     shape_string(s));
  }
}

// Fills col [Cin*9, rows*W] for output rows [y0, y0+rows).
template <typename T>
void im2col(const T* in, std::size_t cin, std::size_t h, std::size_t w,
            std::size_t y0, std::size_t rows, T* col) {
  const std::size_t p = rows * w;
  for (std::size_t c = 0; c < cin; ++c) {
    const T* plane = in + c * h * w;
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        T* dst = col + ((c * 3 + ky) * 3 + kx) * p;
        for (std::size_t yy = 0; yy < rows; ++yy) {
          T* drow = dst + yy * w;
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y0 + yy + ky) - 1;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) {
            std::fill_n(drow, w, T{0});
            continue;
          }
          const T* srow = plane + static_cast<std::size_t>(sy) * w;
          // x' = x + kx - 1
          if (kx == 0) {
            drow[0] = 0;
            std::copy_n(srow, w - 1, drow + 1);
          } else if (kx == 1) {
            std::copy_n(srow, w, drow);
          } else {
            std::copy_n(srow + 1, w - 1, drow);
            drow[w - 1] = 0;
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, std::size_t cin, std::size_t h, std::size_t w,
                std::size_t y0, std::size_t rows, T* in_grad) {
  const std::size_t p = rows * w;
  for (std::size_t c = 0; c < cin; ++c) {
    T* plane = in_grad + c * h * w;
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        const T* src = col + ((c * 3 + ky) * 3 + kx) * p;
        for (std::size_t yy = 0; yy < rows; ++yy) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y0 + yy + ky) - 1;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
          const T* srow = src + yy * w;
          T* drow = plane + static_cast<std::size_t>(sy) * w;
          if (kx == 0) {
            for (std::size_t x = 1; x < w; ++x) drow[x - 1] += srow[x];
          } else if (kx == 1) {
            for (std::size_t x = 0; x < w; ++x) drow[x] += srow[x];
          } else {
            for (std::size_t x = 0; x + 1 < w; ++x) drow[x + 1] += srow[x];
          }
        }
      }
    }
  }
}

// Interpolation taps for one axis.
struct Taps {
  std::vector<std::size_t> i0, i1;
  std::vector<double> w1;

  Taps(std::size_t in, std::size_t out) : i0(out), i1(out), w1(out) {
    const double ratio = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t o = 0; o < out; ++o) {
      double src = (static_cast<double>(o) + 0.5) * ratio - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(std::floor(src));
      i0[o] = lo;
      i1[o] = std::min(lo + 1, in - 1);
      w1[o] = src - static_cast<double>(lo);
    }
  }
};

template <typename T>
void resize_forward(const BasicTensor<T>& in, const Taps& ty, const Taps& tx,
                    BasicTensor<T>& out) {
  const std::size_t c = in.dim(0), w = in.dim(2);
  const std::size_t oh = out.dim(1), ow = out.dim(2);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const T wy1 = static_cast<T>(ty.w1[oy]);
      const T wy0 = T{1} - wy1;
      const T* r0 = in.raw() + (ch * in.dim(1) + ty.i0[oy]) * w;
      const T* r1 = in.raw() + (ch * in.dim(1) + ty.i1[oy]) * w;
      T* dst = out.raw() + (ch * oh + oy) * ow;
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const T wx1 = static_cast<T>(tx.w1[ox]);
        const T wx0 = T{1} - wx1;
        const std::size_t x0 = tx.i0[ox], x1 = tx.i1[ox];
        dst[ox] = wy0 * (wx0 * r0[x0] + wx1 * r0[x1]) +
                  wy1 * (wx0 * r1[x0] + wx1 * r1[x1]);
      }
    }
  }
}

struct SampleTap {
  std::size_t y0, y1, x0, x1;
  double wy, wx;
};

std::vector<SampleTap> sample_taps(std::size_t h, std::size_t w,
                                   std::span<const Coord> coords) {
  std::vector<SampleTap> taps(coords.size());
  const double ymax = static_cast<double>(h - 1);
  const double xmax = static_cast<double>(w - 1);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const Coord& c = coords[i];
    if (!(c.y >= 0.0 && c.y <= ymax && c.x >= 0.0 && c.x <= xmax)) {
      throw PreconditionError("sample coordinate (" + std::to_string(c.y) + "," +
                              std::to_string(c.x) + ") outside [0," +
                              std::to_string(h - 1) + "]x[0," +
                              std::to_string(w - 1) + "]");
    }
    const auto y0 = static_cast<std::size_t>(std::floor(c.y));
    const auto x0 = static_cast<std::size_t>(std::floor(c.x));
    taps[i] = {y0, std::min(y0 + 1, h - 1), x0, std::min(x0 + 1, w - 1),
               c.y - static_cast<double>(y0), c.x - static_cast<double>(x0)};
  }
  return taps;
}

template <typename T>
void sample_forward(const BasicTensor<T>& in, const std::vector<SampleTap>& taps,
                    BasicTensor<T>& out) {
  const std::size_t c = in.dim(0), h = in.dim(1), w = in.dim(2);
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const SampleTap& t = taps[i];
    const T wy1 = static_cast<T>(t.wy), wx1 = static_cast<T>(t.wx);
    const T wy0 = T{1} - wy1, wx0 = T{1} - wx1;
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T* p = in.raw() + ch * h * w;
      out[i * c + ch] = wy0 * (wx0 * p[t.y0 * w + t.x0] + wx1 * p[t.y0 * w + t.x1]) +
                        wy1 * (wx0 * p[t.y1 * w + t.x0] + wx1 * p[t.y1 * w + t.x1]);
    }
  }
}

}  // namespace

template <typename T>
BasicVar<T> conv2d(BasicVar<T> input, BasicVar<T> kernel, BasicVar<T> bias) {
  auto& g = input.graph();
  if (&kernel.graph() != &g || &bias.graph() != &g) {
    throw StateError("conv2d operands belong to different graphs");
  }
  auto iv = g.shared_value(input);
  auto kv = g.shared_value(kernel);
  auto bv = g.shared_value(bias);
  require_rank3(iv->shape(), "conv2d");
  const Shape& ks = kv->shape();
  if (ks.size() != 4 || ks[2] != 3 || ks[3] != 3) {
    throw ShapeError("conv2d kernel must be [Cout,Cin,3,3], got " +
                     shape_string(ks));
  }
  const std::size_t cin = iv->dim(0), h = iv->dim(1), w = iv->dim(2);
  const std::size_t cout = ks[0];
  if (ks[1] != cin) {
    throw ShapeError("conv2d channel mismatch: input has " +
                     std::to_string(cin) + " channels, kernel expects " +
                     std::to_string(ks[1]));
  }
  if (bv->shape() != Shape{cout}) {
    throw ShapeError("conv2d bias must be [" + std::to_string(cout) +
                     "], got " + shape_string(bv->shape()));
  }
  const std::size_t kdim = cin * 9;
  const std::size_t hw = h * w;
  const std::size_t tile_rows = std::max<std::size_t>(1, kConvTilePixels / w);

  BasicTensor<T> out(Shape{cout, h, w});
  ConstMatMap<T> kmat(kv->raw(), cout, kdim);
  std::vector<T> col(kdim * std::min(tile_rows, h) * w);
  for (std::size_t y0 = 0; y0 < h; y0 += tile_rows) {
    const std::size_t rows = std::min(tile_rows, h - y0);
    const std::size_t p = rows * w;
    im2col(iv->raw(), cin, h, w, y0, rows, col.data());
    ConstMatMap<T> cmat(col.data(), kdim, p);
    StridedMap<T> otile(out.raw() + y0 * w, cout, p, Strided(hw));
    otile.noalias() = kmat * cmat;
  }
  for (std::size_t o = 0; o < cout; ++o) {
    T* plane = out.raw() + o * hw;
    const T b = (*bv)[o];
    for (std::size_t i = 0; i < hw; ++i) plane[i] += b;
  }

  return g.record(
      OpKind::Conv2d, {input, kernel, bias}, std::move(out),
      [iv, kv, cin, cout, h, w, kdim, hw, tile_rows](
          const BasicTensor<T>& go, std::span<BasicTensor<T>* const> gi) {
        ConstMatMap<T> kmat(kv->raw(), cout, kdim);
        std::vector<T> col(kdim * std::min(tile_rows, h) * w);
        std::vector<T> dcol(gi[0] ? col.size() : 0);
        for (std::size_t y0 = 0; y0 < h; y0 += tile_rows) {
          const std::size_t rows = std::min(tile_rows, h - y0);
          const std::size_t p = rows * w;
          ConstStridedMap<T> gtile(go.raw() + y0 * w, cout, p, Strided(hw));
          if (gi[0]) {
            MatMap<T> dmat(dcol.data(), kdim, p);
            dmat.noalias() = kmat.transpose() * gtile;
            col2im_add(dcol.data(), cin, h, w, y0, rows, gi[0]->raw());
          }
          if (gi[1]) {
            im2col(iv->raw(), cin, h, w, y0, rows, col.data());
            ConstMatMap<T> cmat(col.data(), kdim, p);
            MatMap<T> gk(gi[1]->raw(), cout, kdim);
            gk.noalias() += gtile * cmat.transpose();
          }
        }
        if (gi[2]) {
          for (std::size_t o = 0; o < cout; ++o) {
            const T* plane = go.raw() + o * hw;
            T acc = 0;
            for (std::size_t i = 0; i < hw; ++i) acc += plane[i];
            (*gi[2])[o] += acc;
          }
        }
      });
}

template <typename T>
BasicVar<T> maxpool2(BasicVar<T> input) {
  auto& g = input.graph();
  const auto& in = input.value();
  require_rank3(in.shape(), "maxpool2");
  const std::size_t c = in.dim(0), h = in.dim(1), w = in.dim(2);
  const std::size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
  BasicTensor<T> out(Shape{c, oh, ow});
  auto arg = std::make_shared<std::vector<std::size_t>>(out.size());
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (ch * h + 2 * oy) * w + 2 * ox;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          const std::size_t y = 2 * oy + dy;
          if (y >= h) break;
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t x = 2 * ox + dx;
            if (x >= w) break;
            const std::size_t idx = (ch * h + y) * w + x;
            if (in[idx] > in[best]) best = idx;
          }
        }
        const std::size_t o = (ch * oh + oy) * ow + ox;
        out[o] = in[best];
        (*arg)[o] = best;
      }
    }
  }
  return g.record(OpKind::MaxPool2, {input}, std::move(out),
                  [arg](const BasicTensor<T>& go,
                        std::span<BasicTensor<T>* const> gi) {
                    T* gx = gi[0]->raw();
                    for (std::size_t o = 0; o < arg->size(); ++o) {
                      gx[(*arg)[o]] += go[o];
                    }
                  });
}

template <typename T>
BasicTensor<T> resize_bilinear(const BasicTensor<T>& input,
                               std::size_t out_height, std::size_t out_width) {
  require_rank3(input.shape(), "bilinear_resize");
  if (out_height == 0 || out_width == 0) {
    throw PreconditionError("bilinear_resize target extents must be >= 1");
  }
  const Taps ty(input.dim(1), out_height);
  const Taps tx(input.dim(2), out_width);
  BasicTensor<T> out(Shape{input.dim(0), out_height, out_width});
  resize_forward(input, ty, tx, out);
  return out;
}

template <typename T>
BasicVar<T> bilinear_resize(BasicVar<T> input, std::size_t out_height,
                            std::size_t out_width) {
  auto& g = input.graph();
  const auto& in = input.value();
  require_rank3(in.shape(), "bilinear_resize");
  if (out_height == 0 || out_width == 0) {
    throw PreconditionError("bilinear_resize target extents must be >= 1");
  }
  auto ty = std::make_shared<const Taps>(in.dim(1), out_height);
  auto tx = std::make_shared<const Taps>(in.dim(2), out_width);
  BasicTensor<T> out(Shape{in.dim(0), out_height, out_width});
  resize_forward(in, *ty, *tx, out);
  const std::size_t c = in.dim(0), w = in.dim(2), h = in.dim(1);
  return g.record(
      OpKind::BilinearResize, {input}, std::move(out),
      [ty, tx, c, h, w, out_height, out_width](
          const BasicTensor<T>& go, std::span<BasicTensor<T>* const> gi) {
        T* gx = gi[0]->raw();
        for (std::size_t ch = 0; ch < c; ++ch) {
          for (std::size_t oy = 0; oy < out_height; ++oy) {
            const T wy1 = static_cast<T>(ty->w1[oy]);
            const T wy0 = T{1} - wy1;
            T* r0 = gx + (ch * h + ty->i0[oy]) * w;
            T* r1 = gx + (ch * h + ty->i1[oy]) * w;
            const T* src = go.raw() + (ch * out_height + oy) * out_width;
            for (std::size_t ox = 0; ox < out_width; ++ox) {
              const T wx1 = static_cast<T>(tx->w1[ox]);
              const T wx0 = T{1} - wx1;
              const std::size_t x0 = tx->i0[ox], x1 = tx->i1[ox];
              const T gv = src[ox];
              r0[x0] += wy0 * wx0 * gv;
              r0[x1] += wy0 * wx1 * gv;
              r1[x0] += wy1 * wx0 * gv;
              r1[x1] += wy1 * wx1 * gv;
            }
          }
        }
      });
}

template <typename T>
BasicTensor<T> sample_bilinear(const BasicTensor<T>& input,
                               std::span<const Coord> coords) {
  require_rank3(input.shape(), "bilinear_sample");
  if (coords.empty()) throw PreconditionError("bilinear_sample needs coords");
  const auto taps = sample_taps(input.dim(1), input.dim(2), coords);
  BasicTensor<T> out(Shape{coords.size(), input.dim(0)});
  sample_forward(input, taps, out);
  return out;
}

template <typename T>
BasicVar<T> bilinear_sample(BasicVar<T> input, std::span<const Coord> coords) {
  auto& g = input.graph();
  const auto& in = input.value();
  require_rank3(in.shape(), "bilinear_sample");
  if (coords.empty()) throw PreconditionError("bilinear_sample needs coords");
  const std::size_t c = in.dim(0), h = in.dim(1), w = in.dim(2);
  auto taps = std::make_shared<const std::vector<SampleTap>>(
      sample_taps(h, w, coords));
  BasicTensor<T> out(Shape{coords.size(), c});
  sample_forward(in, *taps, out);
  return g.record(
      OpKind::BilinearSample, {input}, std::move(out),
      [taps, c, h, w](const BasicTensor<T>& go,
                      std::span<BasicTensor<T>* const> gi) {
        T* gx = gi[0]->raw();
        for (std::size_t i = 0; i < taps->size(); ++i) {
          const SampleTap& t = (*taps)[i];
          const T wy1 = static_cast<T>(t.wy), wx1 = static_cast<T>(t.wx);
          const T wy0 = T{1} - wy1, wx0 = T{1} - wx1;
          for (std::size_t ch = 0; ch < c; ++ch) {
            T* p = gx + ch * h * w;
            const T gv = go[i * c + ch];
            p[t.y0 * w + t.x0] += wy0 * wx0 * gv;
            p[t.y0 * w + t.x1] += wy0 * wx1 * gv;
            p[t.y1 * w + t.x0] += wy1 * wx0 * gv;
            p[t.y1 * w + t.x1] += wy1 * wx1 * gv;
          }
        }
      });
}

#define STROTSS_INSTANTIATE_IMAGE_OPS(T)                                       \
  template BasicVar<T> conv2d(BasicVar<T>, BasicVar<T>, BasicVar<T>);          \
  template BasicVar<T> maxpool2(BasicVar<T>);                                  \
  template BasicVar<T> bilinear_resize(BasicVar<T>, std::size_t, std::size_t); \
  template BasicVar<T> bilinear_sample(BasicVar<T>, std::span<const Coord>);   \
  template BasicTensor<T> resize_bilinear(const BasicTensor<T>&, std::size_t,  \
                                          std::size_t);                        \
  template BasicTensor<T> sample_bilinear(const BasicTensor<T>&,               \
                                          std::span<const Coord>);

STROTSS_INSTANTIATE_IMAGE_OPS(float)
STROTSS_INSTANTIATE_IMAGE_OPS(double)

}  // namespace strotss
