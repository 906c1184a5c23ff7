#include "strotss/stylize.hpp"

#include <algorithm>
#include <cmath>

#include "strotss/image_ops.hpp"
#include "strotss/losses.hpp"
#include "strotss/ops.hpp"
#include "strotss/pyramid.hpp"
#include "strotss/sampling.hpp"

namespace strotss {
namespace {

constexpr std::pair<StyleLossMode, std::string_view> kStyleLossNames[] = {
    {StyleLossMode::Full, "full"},         {StyleLossMode::Remd, "remd"},
    {StyleLossMode::Moment, "moment"},     {StyleLossMode::RA, "ra"},
    {StyleLossMode::RB, "rb"},             {StyleLossMode::RemdMoment, "remd-moment"},
};
constexpr std::pair<GroundMetric, std::string_view> kMetricNames[] = {
    {GroundMetric::Cosine, "cosine"}, {GroundMetric::Euclidean, "l2"}};
constexpr std::pair<OptimizeMode, std::string_view> kOptimizeNames[] = {
    {OptimizeMode::Pyramid, "pyramid"}, {OptimizeMode::Pixels, "pixels"}};

template <typename E, std::size_t N>
std::string_view name_of(const std::pair<E, std::string_view> (&table)[N], E value) {
  for (const auto& [v, n] : table) {
    if (v == value) return n;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> parse_name(const std::pair<E, std::string_view> (&table)[N],
                            std::string_view text) {
  for (const auto& [v, n] : table) {
    if (n == text) return v;
  }
  return std::nullopt;
}

bool uses_moment(StyleLossMode m) {
  return m == StyleLossMode::Full || m == StyleLossMode::Moment ||
         m == StyleLossMode::RemdMoment;
}

bool uses_transport(StyleLossMode m) { return m != StyleLossMode::Moment; }

bool uses_palette(StyleLossMode m) { return m == StyleLossMode::Full; }

void require_finite_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw PreconditionError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

std::string_view to_string(StyleLossMode mode) { return name_of(kStyleLossNames, mode); }
std::string_view to_string(GroundMetric metric) { return name_of(kMetricNames, metric); }
std::string_view to_string(OptimizeMode mode) { return name_of(kOptimizeNames, mode); }

std::optional<StyleLossMode> parse_style_loss_mode(std::string_view text) {
  return parse_name(kStyleLossNames, text);
}
std::optional<GroundMetric> parse_ground_metric(std::string_view text) {
  return parse_name(kMetricNames, text);
}
std::optional<OptimizeMode> parse_optimize_mode(std::string_view text) {
  return parse_name(kOptimizeNames, text);
}

void StylizeConfig::validate() const {
  require_finite_positive(alpha_base, "alpha");
  require_finite_positive(learning_rate, "learning rate");
  require_finite_positive(final_learning_rate, "final learning rate");
  if (scale_count == 0) throw PreconditionError("scale count must be at least 1");
  if (scale_count > 16) throw PreconditionError("scale count must be at most 16");
  if (sample_count < 2) throw PreconditionError("sample count must be at least 2");
  if (base_long_side == 0) throw PreconditionError("base long side must be positive");
  if (pyramid_levels == 0) throw PreconditionError("pyramid needs at least one level");
  if (!(rmsprop.rho >= 0.0 && rmsprop.rho < 1.0) || !(rmsprop.eps > 0.0)) {
    throw PreconditionError("rmsprop needs 0 <= rho < 1 and eps > 0");
  }
}

Extent scaled_extent(Extent source, std::size_t long_side) {
  if (source.area() == 0 || long_side == 0) throw PreconditionError("empty extent");
  const double r = static_cast<double>(long_side) / static_cast<double>(source.long_side());
  auto side = [&](std::size_t v) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(
                                        std::llround(static_cast<double>(v) * r)));
  };
  if (source.height >= source.width) return {long_side, side(source.width)};
  return {side(source.height), long_side};
}

std::vector<StagePlan> plan_schedule(const StylizeConfig& config, Extent content,
                                     Extent style) {
  config.validate();
  auto make = [&](std::size_t s, std::size_t iterations, double lr) {
    StagePlan p;
    p.scale = s;
    p.long_side = config.base_long_side << (s - 1);
    p.content = scaled_extent(content, p.long_side);
    p.style = scaled_extent(style, p.long_side);
    p.alpha = config.alpha_base / std::ldexp(1.0, static_cast<int>(s));
    p.learning_rate = lr;
    p.iterations = iterations;
    return p;
  };
  const std::size_t S = config.scale_count;
  if (config.single_scale) {
    return {make(S, S * config.iterations, config.final_learning_rate)};
  }
  std::vector<StagePlan> plan;
  for (std::size_t s = 1; s <= S; ++s) {
    plan.push_back(make(s, config.iterations,
                        s == S ? config.final_learning_rate : config.learning_rate));
  }
  return plan;
}

Tensor resize_image(const Tensor& image, Extent target) {
  if (image.rank() != 3) throw ShapeError("resize_image expects [C,H,W]");
  Tensor x = image;
  while (x.dim(1) >= 2 * target.height && x.dim(2) >= 2 * target.width &&
         (x.dim(1) > target.height || x.dim(2) > target.width)) {
    x = downsample(x);
  }
  if (x.dim(1) == target.height && x.dim(2) == target.width) return x;
  return resize_bilinear(x, target.height, target.width);
}

std::array<float, 3> mean_color(const Tensor& image) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ShapeError("mean_color expects [3,H,W], got " + shape_string(image.shape()));
  }
  const std::size_t plane = image.dim(1) * image.dim(2);
  std::array<float, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < plane; ++i) s += image[c * plane + i];
    out[c] = static_cast<float>(s / static_cast<double>(plane));
  }
  return out;
}

Tensor initial_image(const Tensor& content, const Tensor& style, std::size_t levels) {
  const Extent e{content.dim(1), content.dim(2)};
  LaplacianPyramid pyr = decompose(content, supported_levels(e, levels));
  Tensor init = std::move(pyr.levels.front());
  const auto mu = mean_color(style);
  const std::size_t plane = e.area();
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < plane; ++i) init[c * plane + i] += mu[c];
  }
  return init;
}

StageObjective::StageObjective(Tensor content, Tensor style, const WeightStore& weights,
                               const NetworkSpec& spec, const StylizeConfig& config,
                               double alpha, const GuidanceSpec* guidance)
    : content_(std::move(content)),
      style_(std::move(style)),
      weights_(&weights),
      spec_(spec),
      config_(config),
      alpha_(alpha),
      guidance_(guidance && !guidance->empty() ? guidance : nullptr) {
  total_loss_denominator(alpha);
  content_acts_ = extract_activations(content_, weights, spec);
  style_acts_ = extract_activations(style_, weights, spec);
}

StageObjective::Sample StageObjective::draw(Rng& rng) const {
  const Extent c = content_extent(), s = style_extent();
  Sample out;
  out.content = sample_content_coords(c.height, c.width,
                                      std::min(config_.sample_count, c.area()), rng);
  out.style = sample_style_coords(s.height, s.width,
                                  std::min(config_.sample_count, s.area()), rng);
  return out;
}

LossBreakdown StageObjective::evaluate(Var image, const Sample& sample) const {
  Graph& g = image.graph();
  const Extent ce = content_extent(), se = style_extent();
  if (image.shape() != Shape{3, ce.height, ce.width}) {
    throw ShapeError("stage image has shape " + shape_string(image.shape()) +
                     ", expected " + shape_string({3, ce.height, ce.width}));
  }
  auto constants = [&g](const std::vector<std::shared_ptr<const Tensor>>& acts) {
    std::vector<Var> out;
    for (const auto& a : acts) out.push_back(g.constant(a));
    return out;
  };
  const std::vector<Var> acts_x = forward_features(image, *weights_, spec_);
  const std::vector<Var> acts_c = constants(content_acts_);
  const std::vector<Var> acts_s = constants(style_acts_);
  const FeatureMatrix fx = sample_hypercolumns<float>(acts_x, ce, sample.content);
  const FeatureMatrix fc = sample_hypercolumns<float>(acts_c, ce, sample.content);
  const FeatureMatrix fs = sample_hypercolumns<float>(acts_s, se, sample.style);

  LossBreakdown out;
  const Var zero = g.constant(Tensor::scalar(0.0f));
  out.content = self_similarity_loss(fx.values, fc.values);
  out.moment = uses_moment(config_.style_loss) ? moment_loss(fx.values, fs.values) : zero;
  out.remd = zero;
  if (uses_transport(config_.style_loss)) {
    Var cost = ground_cost(fx.values, fs.values, config_.ground_metric);
    if (guidance_) {
      GuidedCost<float> guided =
          apply_guidance(cost, sample.content, ce, sample.style, se, *guidance_);
      cost = guided.cost;
      out.dropped_constraints = guided.dropped;
    }
    const RelaxedEmd<float> r = relaxed_emd(cost);
    switch (config_.style_loss) {
      case StyleLossMode::RA: out.remd = r.r_a; break;
      case StyleLossMode::RB: out.remd = r.r_b; break;
      default: out.remd = r.remd; break;
    }
  }
  out.palette = zero;
  if (uses_palette(config_.style_loss)) {
    const Var px = bilinear_sample(image, std::span<const Coord>(sample.content));
    const Var ps = g.constant(sample_bilinear(style_, std::span<const Coord>(sample.style)));
    out.palette = palette_loss(px, ps);
  }
  out.total = total_loss(out.content, out.moment, out.remd, out.palette,
                         static_cast<float>(alpha_));
  return out;
}

ScaleResult stylize_scale(const StageObjective& objective, const Tensor& init,
                          const StagePlan& plan, const StylizeConfig& config, Rng& rng,
                          const LossCallback& on_record) {
  const Extent e = objective.content_extent();
  if (init.shape() != Shape{3, e.height, e.width}) {
    throw ShapeError("initial image " + shape_string(init.shape()) +
                     " does not match stage dims " + shape_string({3, e.height, e.width}));
  }
  // A pyramid round trip is only exact to rounding; zero steps keep init as is.
  if (plan.iterations == 0) return {init, {}};
  const bool pyramid = config.optimize == OptimizeMode::Pyramid;
  std::vector<Tensor> params;
  if (pyramid) {
    params = decompose(init, supported_levels(e, config.pyramid_levels)).levels;
  } else {
    params.push_back(init);
  }
  RmspropState state = RmspropState::for_params(params, config.rmsprop);

  ScaleResult result;
  for (std::size_t t = 0; t < plan.iterations; ++t) {
    Graph g;
    std::vector<Var> leaves;
    for (const Tensor& p : params) leaves.push_back(g.leaf(p));
    const Var image = pyramid ? reconstruct<float>(leaves) : leaves.front();
    const StageObjective::Sample sample = objective.draw(rng);
    const LossBreakdown losses = objective.evaluate(image, sample);

    LossRecord rec;
    rec.scale = plan.scale;
    rec.iter = t;
    rec.lc = losses.content.item();
    rec.lm = losses.moment.item();
    rec.lr = losses.remd.item();
    rec.lp = losses.palette.item();
    rec.total = losses.total.item();
    rec.alpha = plan.alpha;
    rec.learning_rate = plan.learning_rate;
    rec.long_side = plan.long_side;
    rec.extent = e;
    rec.dropped_constraints = losses.dropped_constraints;
    if (on_record) on_record(rec);
    result.log.push_back(rec);

    g.backward(losses.total);
    std::vector<Tensor> grads;
    for (const Var& leaf : leaves) grads.push_back(g.take_grad(leaf));
    rmsprop_step(params, grads, state, plan.learning_rate);
  }
  result.image = pyramid ? reconstruct(LaplacianPyramid{std::move(params)})
                         : std::move(params.front());
  return result;
}

StylizeResult stylize(const Tensor& content, const Tensor& style,
                      const WeightStore& weights, const StylizeConfig& config,
                      const GuidanceSpec* guidance, const LossCallback& on_record,
                      const NetworkSpec& spec) {
  for (const Tensor* t : {&content, &style}) {
    if (t->rank() != 3 || t->dim(0) != 3) {
      throw ShapeError("stylize expects [3,H,W] images, got " + shape_string(t->shape()));
    }
  }
  if (guidance) guidance->validate();
  StylizeResult result;
  result.stages = plan_schedule(config, {content.dim(1), content.dim(2)},
                                {style.dim(1), style.dim(2)});
  Rng rng(config.seed);
  Tensor current;
  for (std::size_t i = 0; i < result.stages.size(); ++i) {
    const StagePlan& plan = result.stages[i];
    Tensor content_s = resize_image(content, plan.content);
    Tensor style_s = resize_image(style, plan.style);
    Tensor init = i == 0 ? initial_image(content_s, style_s, config.pyramid_levels)
                         : resize_bilinear(current, plan.content.height, plan.content.width);
    const StageObjective objective(std::move(content_s), std::move(style_s), weights, spec,
                                   config, plan.alpha, guidance);
    ScaleResult stage = stylize_scale(objective, init, plan, config, rng, on_record);
    current = std::move(stage.image);
    result.log.insert(result.log.end(), stage.log.begin(), stage.log.end());
  }
  for (float& v : current.data()) v = std::clamp(v, 0.0f, 1.0f);
  result.image = std::move(current);
  return result;
}

}  // namespace strotss
