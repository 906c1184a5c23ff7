#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "strotss/feature_net.hpp"
#include "strotss/guidance.hpp"
#include "strotss/losses.hpp"
#include "strotss/random.hpp"
#include "strotss/rmsprop.hpp"

namespace strotss {

// Which style terms enter the objective. Disabled terms contribute 0 while
// the normalizing denominator stays the same.
enum class StyleLossMode {
  Full,        // REMD + moments + palette
  Remd,        // REMD only
  Moment,      // moments only
  RA,          // one-sided r_a in place of REMD
  RB,          // one-sided r_b in place of REMD
  RemdMoment,  // REMD + moments
};
enum class OptimizeMode { Pyramid, Pixels };

std::string_view to_string(StyleLossMode mode);
std::string_view to_string(GroundMetric metric);
std::string_view to_string(OptimizeMode mode);
std::optional<StyleLossMode> parse_style_loss_mode(std::string_view text);
std::optional<GroundMetric> parse_ground_metric(std::string_view text);
std::optional<OptimizeMode> parse_optimize_mode(std::string_view text);

struct StylizeConfig {
  double alpha_base = 16.0;
  std::size_t scale_count = 4;
  std::size_t iterations = 200;
  double learning_rate = 0.002;
  double final_learning_rate = 0.001;
  std::size_t sample_count = 1024;
  std::size_t base_long_side = 64;
  std::size_t pyramid_levels = 5;
  std::uint64_t seed = 0;
  StyleLossMode style_loss = StyleLossMode::Full;
  GroundMetric ground_metric = GroundMetric::Cosine;
  OptimizeMode optimize = OptimizeMode::Pyramid;
  bool single_scale = false;
  RmspropConfig rmsprop;

  // Throws PreconditionError on out-of-range values.
  void validate() const;
};

// Image dims with the long side set to `long_side`, aspect preserved.
Extent scaled_extent(Extent source, std::size_t long_side);

struct StagePlan {
  std::size_t scale = 0;  // 1-based
  std::size_t long_side = 0;
  Extent content;
  Extent style;
  double alpha = 0.0;
  double learning_rate = 0.0;
  std::size_t iterations = 0;
};

std::vector<StagePlan> plan_schedule(const StylizeConfig& config, Extent content,
                                     Extent style);

// Area-aware bilinear resize: halves repeatedly while the target is at most
// half the source, then finishes with one bilinear resize.
Tensor resize_image(const Tensor& image, Extent target);

// Per-channel mean of a [3,H,W] image.
std::array<float, 3> mean_color(const Tensor& image);

// Finest band of the content pyramid plus the mean style color.
Tensor initial_image(const Tensor& content, const Tensor& style, std::size_t levels);

struct LossBreakdown {
  Var content;
  Var moment;
  Var remd;
  Var palette;
  Var total;
  std::size_t dropped_constraints = 0;
};

// The objective at one stage: cached content/style activations plus the
// configuration that selects loss terms and metric.
// `weights` and `guidance` are held by pointer and must outlive the object.
class StageObjective {
 public:
  StageObjective(Tensor content, Tensor style, const WeightStore& weights,
                 const NetworkSpec& spec, const StylizeConfig& config, double alpha,
                 const GuidanceSpec* guidance);

  struct Sample {
    std::vector<Coord> content;
    std::vector<Coord> style;
  };
  Sample draw(Rng& rng) const;

  // Builds every term in the graph that owns `image` ([3,H,W], content dims).
  LossBreakdown evaluate(Var image, const Sample& sample) const;

  Extent content_extent() const noexcept { return {content_.dim(1), content_.dim(2)}; }
  Extent style_extent() const noexcept { return {style_.dim(1), style_.dim(2)}; }
  double alpha() const noexcept { return alpha_; }

 private:
  Tensor content_;
  Tensor style_;
  std::vector<std::shared_ptr<const Tensor>> content_acts_;
  std::vector<std::shared_ptr<const Tensor>> style_acts_;
  const WeightStore* weights_;
  NetworkSpec spec_;
  StylizeConfig config_;
  double alpha_;
  const GuidanceSpec* guidance_;
};

struct LossRecord {
  std::size_t scale = 0;
  std::size_t iter = 0;
  double lc = 0, lm = 0, lr = 0, lp = 0, total = 0;
  double alpha = 0;
  double learning_rate = 0;
  std::size_t long_side = 0;
  Extent extent;
  std::size_t dropped_constraints = 0;
};
using LossCallback = std::function<void(const LossRecord&)>;

struct ScaleResult {
  Tensor image;  // unclamped
  std::vector<LossRecord> log;
};

// Runs `plan.iterations` RMSprop steps from `init`. Each step resamples
// coordinates, logs the losses at the current image, then updates.
ScaleResult stylize_scale(const StageObjective& objective, const Tensor& init,
                          const StagePlan& plan, const StylizeConfig& config, Rng& rng,
                          const LossCallback& on_record = {});

struct StylizeResult {
  Tensor image;  // clamped to [0,1]
  std::vector<LossRecord> log;
  std::vector<StagePlan> stages;
};

StylizeResult stylize(const Tensor& content, const Tensor& style,
                      const WeightStore& weights, const StylizeConfig& config,
                      const GuidanceSpec* guidance = nullptr,
                      const LossCallback& on_record = {},
                      const NetworkSpec& spec = NetworkSpec::vgg16());

}  // namespace strotss
