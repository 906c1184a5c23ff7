#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "strotss/graph.hpp"

namespace strotss {

// Stand-in for an infinite cost. Large enough never to win a minimum,
// small enough to keep all arithmetic finite.
inline constexpr double kGuidanceSentinel = 1e8;
inline constexpr double kDefaultBeta = 5.0;

// How a constraint's coordinates claim rows/columns of a sampled cost
// matrix. Region: a sample belongs to the constraint when its nearest pixel
// is in the set. Point: each point claims the nearest sample within two
// sampling-grid spacings.
enum class GuidanceBinding { Region, Point };

struct GuidancePair {
  std::vector<Coord> output;  // in GuidanceSpec::output_frame pixels
  std::vector<Coord> style;   // in GuidanceSpec::style_frame pixels
};

struct GuidanceSpec {
  Extent output_frame;
  Extent style_frame;
  double beta = kDefaultBeta;
  GuidanceBinding binding = GuidanceBinding::Region;
  std::vector<GuidancePair> pairs;

  bool empty() const noexcept { return pairs.empty(); }
  // Throws ValidationError on beta <= 0, empty sets, out-of-frame
  // coordinates, or (for regions) output sets that overlap.
  void validate() const;
};

// Elementwise rewrite C' = C * multiplier + offset for one sampled cost.
struct GuidanceMasks {
  Tensor multiplier;  // [n,m]
  Tensor offset;      // [n,m]
  std::vector<int> row_pair;                 // constraint index per row, -1 if free
  std::vector<std::vector<bool>> allowed;    // per constraint, per column
  std::size_t active = 0;
  std::size_t dropped = 0;                   // constraints matching no row or column
};

// Sample coordinates are given in their own extents and mapped into the
// spec frames with the half-pixel convention used for resizing.
GuidanceMasks build_guidance_masks(const GuidanceSpec& spec,
                                   std::span<const Coord> output_coords,
                                   Extent output_extent,
                                   std::span<const Coord> style_coords,
                                   Extent style_extent);

template <typename T>
struct GuidedCost {
  BasicVar<T> cost;
  std::size_t dropped = 0;
};

// Within-pair entries are scaled by beta, out-of-pair entries of constrained
// rows become the sentinel, and unconstrained rows pass through unchanged.
template <typename T>
GuidedCost<T> apply_guidance(BasicVar<T> cost, std::span<const Coord> output_coords,
                             Extent output_extent, std::span<const Coord> style_coords,
                             Extent style_extent, const GuidanceSpec& spec);

struct PointPair {
  Coord content;
  Coord style;
};

// Expands each clicked pair into a 3x3 grid of point constraints with
// spacing 20 * long_side / 512 in each image. Grid points falling outside
// either image are dropped.
GuidanceSpec augment_point_constraints(std::span<const PointPair> points,
                                       Extent content, Extent style,
                                       double beta = kDefaultBeta);

// Label images hold 0 for unconstrained pixels and k > 0 for region k.
// Region k of the content labels pairs with region k of the style labels.
GuidanceSpec region_guidance(std::span<const std::uint8_t> content_labels,
                             Extent content, std::span<const std::uint8_t> style_labels,
                             Extent style, double beta = kDefaultBeta);

}  // namespace strotss
