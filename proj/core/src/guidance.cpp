#include "strotss/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "strotss/ops.hpp"

namespace strotss {
namespace {

Coord to_frame(Coord c, Extent from, Extent frame) {
  auto map = [](double v, std::size_t src, std::size_t dst) {
    return (v + 0.5) * static_cast<double>(dst) / static_cast<double>(src) - 0.5;
  };
  return {map(c.y, from.height, frame.height), map(c.x, from.width, frame.width)};
}

std::size_t nearest_pixel(Coord c, Extent frame) {
  const auto clampi = [](double v, std::size_t n) {
    const long r = std::lround(v);
    return static_cast<std::size_t>(std::clamp<long>(r, 0, static_cast<long>(n) - 1));
  };
  return clampi(c.y, frame.height) * frame.width + clampi(c.x, frame.width);
}

bool in_frame(Coord c, Extent frame) {
  return c.y >= 0.0 && c.x >= 0.0 && c.y <= static_cast<double>(frame.height) - 1.0 &&
         c.x <= static_cast<double>(frame.width) - 1.0;
}

// Index of the sample nearest to p within radius, or -1.
long nearest_sample(Coord p, std::span<const Coord> samples, double radius) {
  long best = -1;
  double best_d2 = radius * radius;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double dy = samples[i].y - p.y, dx = samples[i].x - p.x;
    const double d2 = dy * dy + dx * dx;
    if (d2 <= best_d2 && (best < 0 || d2 < best_d2)) {
      best = static_cast<long>(i);
      best_d2 = d2;
    }
  }
  return best;
}

}  // namespace

void GuidanceSpec::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ValidationError("guidance beta must be positive, got " + std::to_string(beta));
  }
  if (pairs.empty()) return;
  if (output_frame.area() == 0 || style_frame.area() == 0) {
    throw ValidationError("guidance frames must be non-empty");
  }
  std::vector<int> owner(binding == GuidanceBinding::Region ? output_frame.area() : 0, -1);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const GuidancePair& p = pairs[k];
    if (p.output.empty() || p.style.empty()) {
      throw ValidationError("guidance constraint " + std::to_string(k + 1) +
                            " has an empty coordinate set");
    }
    for (const Coord& c : p.output) {
      if (!in_frame(c, output_frame)) {
        throw ValidationError("guidance constraint " + std::to_string(k + 1) +
                              " has an output coordinate outside the frame");
      }
      if (binding == GuidanceBinding::Region) {
        int& o = owner[nearest_pixel(c, output_frame)];
        if (o >= 0 && o != static_cast<int>(k)) {
          throw ValidationError("guidance constraints " + std::to_string(o + 1) +
                                " and " + std::to_string(k + 1) +
                                " share an output pixel");
        }
        o = static_cast<int>(k);
      }
    }
    for (const Coord& c : p.style) {
      if (!in_frame(c, style_frame)) {
        throw ValidationError("guidance constraint " + std::to_string(k + 1) +
                              " has a style coordinate outside the frame");
      }
    }
  }
}

GuidanceMasks build_guidance_masks(const GuidanceSpec& spec,
                                   std::span<const Coord> output_coords,
                                   Extent output_extent,
                                   std::span<const Coord> style_coords,
                                   Extent style_extent) {
  const std::size_t n = output_coords.size(), m = style_coords.size();
  if (n == 0 || m == 0) throw PreconditionError("guidance needs sampled coordinates");
  GuidanceMasks masks{Tensor({n, m}, 1.0f), Tensor({n, m}, 0.0f),
                      std::vector<int>(n, -1), {}, 0, 0};
  if (spec.empty()) return masks;

  std::vector<Coord> out_f(n), sty_f(m);
  for (std::size_t i = 0; i < n; ++i) {
    out_f[i] = to_frame(output_coords[i], output_extent, spec.output_frame);
  }
  for (std::size_t j = 0; j < m; ++j) {
    sty_f[j] = to_frame(style_coords[j], style_extent, spec.style_frame);
  }

  const std::size_t K = spec.pairs.size();
  std::vector<std::vector<std::size_t>> rows(K);
  masks.allowed.assign(K, std::vector<bool>(m, false));

  if (spec.binding == GuidanceBinding::Region) {
    std::vector<int> out_label(spec.output_frame.area(), -1);
    for (std::size_t k = 0; k < K; ++k) {
      for (const Coord& c : spec.pairs[k].output) {
        int& l = out_label[nearest_pixel(c, spec.output_frame)];
        if (l < 0) l = static_cast<int>(k);
      }
      std::vector<bool> in_style(spec.style_frame.area(), false);
      for (const Coord& c : spec.pairs[k].style) {
        in_style[nearest_pixel(c, spec.style_frame)] = true;
      }
      for (std::size_t j = 0; j < m; ++j) {
        masks.allowed[k][j] = in_style[nearest_pixel(sty_f[j], spec.style_frame)];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int l = out_label[nearest_pixel(out_f[i], spec.output_frame)];
      if (l >= 0) rows[static_cast<std::size_t>(l)].push_back(i);
    }
  } else {
    const double out_radius =
        2.0 * std::sqrt(static_cast<double>(spec.output_frame.area()) / static_cast<double>(n));
    const double sty_radius =
        2.0 * std::sqrt(static_cast<double>(spec.style_frame.area()) / static_cast<double>(m));
    std::vector<bool> claimed(n, false);
    for (std::size_t k = 0; k < K; ++k) {
      for (const Coord& p : spec.pairs[k].output) {
        const long i = nearest_sample(p, out_f, out_radius);
        if (i >= 0 && !claimed[static_cast<std::size_t>(i)]) {
          claimed[static_cast<std::size_t>(i)] = true;
          rows[k].push_back(static_cast<std::size_t>(i));
        }
      }
      for (const Coord& q : spec.pairs[k].style) {
        const long j = nearest_sample(q, sty_f, sty_radius);
        if (j >= 0) masks.allowed[k][static_cast<std::size_t>(j)] = true;
      }
    }
  }

  const float beta = static_cast<float>(spec.beta);
  const float sentinel = static_cast<float>(kGuidanceSentinel);
  for (std::size_t k = 0; k < K; ++k) {
    const bool any_col =
        std::find(masks.allowed[k].begin(), masks.allowed[k].end(), true) !=
        masks.allowed[k].end();
    if (rows[k].empty() || !any_col) {
      ++masks.dropped;
      continue;
    }
    ++masks.active;
    for (std::size_t i : rows[k]) {
      masks.row_pair[i] = static_cast<int>(k);
      for (std::size_t j = 0; j < m; ++j) {
        if (masks.allowed[k][j]) {
          masks.multiplier.at(i, j) = beta;
        } else {
          masks.multiplier.at(i, j) = 0.0f;
          masks.offset.at(i, j) = sentinel;
        }
      }
    }
  }
  return masks;
}

template <typename T>
GuidedCost<T> apply_guidance(BasicVar<T> cost, std::span<const Coord> output_coords,
                             Extent output_extent, std::span<const Coord> style_coords,
                             Extent style_extent, const GuidanceSpec& spec) {
  const Shape& s = cost.shape();
  if (s.size() != 2 || s[0] != output_coords.size() || s[1] != style_coords.size()) {
    throw ShapeError("apply_guidance: cost " + shape_string(s) +
                     " does not match coordinate counts");
  }
  if (spec.empty()) return {cost, 0};
  GuidanceMasks masks =
      build_guidance_masks(spec, output_coords, output_extent, style_coords, style_extent);
  if (masks.active == 0) return {cost, masks.dropped};
  BasicGraph<T>& g = cost.graph();
  BasicVar<T> mul_c = g.constant(masks.multiplier.template cast<T>());
  BasicVar<T> add_c = g.constant(masks.offset.template cast<T>());
  return {cost * mul_c + add_c, masks.dropped};
}

GuidanceSpec augment_point_constraints(std::span<const PointPair> points,
                                       Extent content, Extent style, double beta) {
  GuidanceSpec spec;
  spec.output_frame = content;
  spec.style_frame = style;
  spec.beta = beta;
  spec.binding = GuidanceBinding::Point;
  const double sc = 20.0 * static_cast<double>(content.long_side()) / 512.0;
  const double ss = 20.0 * static_cast<double>(style.long_side()) / 512.0;
  for (const PointPair& p : points) {
    if (!in_frame(p.content, content) || !in_frame(p.style, style)) {
      throw PreconditionError("point pair lies outside its image");
    }
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Coord c{p.content.y + dy * sc, p.content.x + dx * sc};
        const Coord s{p.style.y + dy * ss, p.style.x + dx * ss};
        if (in_frame(c, content) && in_frame(s, style)) {
          spec.pairs.push_back({{c}, {s}});
        }
      }
    }
  }
  return spec;
}

GuidanceSpec region_guidance(std::span<const std::uint8_t> content_labels,
                             Extent content, std::span<const std::uint8_t> style_labels,
                             Extent style, double beta) {
  if (content_labels.size() != content.area() || style_labels.size() != style.area()) {
    throw ValidationError("mask size does not match its image");
  }
  std::map<int, GuidancePair> regions;
  std::map<int, bool> in_content, in_style;
  for (std::size_t i = 0; i < content_labels.size(); ++i) {
    if (const int k = content_labels[i]) {
      in_content[k] = true;
      regions[k].output.push_back({static_cast<double>(i / content.width),
                                   static_cast<double>(i % content.width)});
    }
  }
  for (std::size_t i = 0; i < style_labels.size(); ++i) {
    if (const int k = style_labels[i]) {
      in_style[k] = true;
      regions[k].style.push_back({static_cast<double>(i / style.width),
                                  static_cast<double>(i % style.width)});
    }
  }
  for (const auto& [k, unused] : regions) {
    if (!in_content.count(k) || !in_style.count(k)) {
      throw ValidationError("region " + std::to_string(k) + " appears only in the " +
                            (in_content.count(k) ? "content" : "style") + " mask");
    }
  }
  GuidanceSpec spec;
  spec.output_frame = content;
  spec.style_frame = style;
  spec.beta = beta;
  spec.binding = GuidanceBinding::Region;
  for (auto& [k, pair] : regions) spec.pairs.push_back(std::move(pair));
  return spec;
}

template GuidedCost<float> apply_guidance(BasicVar<float>, std::span<const Coord>, Extent,
                                          std::span<const Coord>, Extent,
                                          const GuidanceSpec&);
template GuidedCost<double> apply_guidance(BasicVar<double>, std::span<const Coord>, Extent,
                                           std::span<const Coord>, Extent,
                                           const GuidanceSpec&);

}  // namespace strotss
