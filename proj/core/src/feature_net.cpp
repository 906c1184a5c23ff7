#include "strotss/feature_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "strotss/image_ops.hpp"
#include "strotss/ops.hpp"
#include "strotss/random.hpp"
#include "strotss/stwt.hpp"

namespace strotss {
namespace {

const std::vector<ConvLayerSpec>& vgg16_layers() {
  static const std::vector<ConvLayerSpec> layers = {
      {"conv1_1", 3, 64, false},    {"conv1_2", 64, 64, false},
      {"conv2_1", 64, 128, true},   {"conv2_2", 128, 128, false},
      {"conv3_1", 128, 256, true},  {"conv3_2", 256, 256, false},
      {"conv3_3", 256, 256, false}, {"conv4_1", 256, 512, true},
      {"conv4_2", 512, 512, false}, {"conv4_3", 512, 512, false},
      {"conv5_1", 512, 512, true},  {"conv5_2", 512, 512, false},
      {"conv5_3", 512, 512, false},
  };
  return layers;
}

Shape kernel_shape(const ConvLayerSpec& l) {
  return {l.out_channels, l.in_channels, 3, 3};
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.data().begin(), t.data().end(),
                     [](float v) { return std::isfinite(v); });
}

template <typename T>
BasicVar<T> weight_constant(BasicGraph<T>& g, const std::shared_ptr<const Tensor>& w) {
  if constexpr (std::is_same_v<T, float>) {
    return g.constant(w);
  } else {
    return g.constant(w->template cast<T>());
  }
}

}  // namespace

std::vector<std::size_t> NetworkSpec::default_keep_set() {
  return {1, 2, 3, 4, 5, 6, 7, 8, 11};
}

NetworkSpec NetworkSpec::vgg16(std::vector<std::size_t> keep_set) {
  if (keep_set.empty()) throw PreconditionError("keep set must not be empty");
  std::sort(keep_set.begin(), keep_set.end());
  if (std::adjacent_find(keep_set.begin(), keep_set.end()) != keep_set.end()) {
    throw PreconditionError("keep set has duplicate layers");
  }
  if (keep_set.front() < 1 || keep_set.back() > vgg16_layers().size()) {
    throw PreconditionError("keep set index out of range 1..13");
  }
  NetworkSpec spec;
  spec.layers_ = vgg16_layers();
  spec.keep_set_ = std::move(keep_set);
  return spec;
}

std::vector<std::size_t> NetworkSpec::kept_channels() const {
  std::vector<std::size_t> out;
  for (std::size_t k : keep_set_) out.push_back(layers_[k - 1].out_channels);
  return out;
}

std::size_t NetworkSpec::hypercolumn_dim() const {
  const auto ch = kept_channels();
  return std::accumulate(ch.begin(), ch.end(), std::size_t{0});
}

std::size_t NetworkSpec::min_input_side() const {
  std::size_t side = 1;
  for (std::size_t i = 0; i < depth(); ++i) {
    if (layers_[i].pool_before) side *= 2;
  }
  return side;
}

WeightStore::WeightStore(std::vector<ConvWeights> layers, WeightSource source)
    : layers_(std::move(layers)), source_(source) {
  const auto& spec = vgg16_layers();
  if (layers_.size() != spec.size()) {
    throw SpecError("expected " + std::to_string(spec.size()) +
                    " conv layers, got " + std::to_string(layers_.size()));
  }
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const ConvWeights& w = layers_[i];
    if (!w.kernel || !w.bias) throw SpecError(spec[i].name + " is missing data");
    if (w.kernel->shape() != kernel_shape(spec[i])) {
      throw SpecError(spec[i].name + " kernel has shape " +
                      shape_string(w.kernel->shape()) + ", expected " +
                      shape_string(kernel_shape(spec[i])));
    }
    if (w.bias->shape() != Shape{spec[i].out_channels}) {
      throw SpecError(spec[i].name + " bias has shape " +
                      shape_string(w.bias->shape()) + ", expected [" +
                      std::to_string(spec[i].out_channels) + "]");
    }
    if (!all_finite(*w.kernel) || !all_finite(*w.bias)) {
      throw SpecError(spec[i].name + " contains non-finite values");
    }
  }
}

bool operator==(const WeightStore& a, const WeightStore& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    if (!(*a.layers_[i].kernel == *b.layers_[i].kernel) ||
        !(*a.layers_[i].bias == *b.layers_[i].bias)) {
      return false;
    }
  }
  return true;
}

WeightStore load_weights(const std::filesystem::path& path) {
  auto entries = stwt::read(path);
  const auto& spec = vgg16_layers();
  if (entries.size() != spec.size()) {
    throw SpecError(path.string() + ": expected " + std::to_string(spec.size()) +
                    " layers, found " + std::to_string(entries.size()));
  }
  std::vector<ConvWeights> layers;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto& e = entries[i];
    if (e.name != spec[i].name) {
      throw SpecError(path.string() + ": layer " + std::to_string(i + 1) +
                      " is named '" + e.name + "', expected '" + spec[i].name + "'");
    }
    if (e.trailing.size() != spec[i].out_channels) {
      throw SpecError(path.string() + ": " + e.name + " bias has length " +
                      std::to_string(e.trailing.size()) + ", expected " +
                      std::to_string(spec[i].out_channels));
    }
    const std::size_t n = e.trailing.size();
    layers.push_back(
        {std::make_shared<const Tensor>(std::move(e.tensor)),
         std::make_shared<const Tensor>(Shape{n}, std::move(e.trailing))});
  }
  return WeightStore(std::move(layers), WeightSource::File);
}

void save_weights(const std::filesystem::path& path, const WeightStore& weights) {
  const auto& spec = vgg16_layers();
  std::vector<stwt::Entry> entries;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto& b = weights.layer(i).bias->data();
    entries.push_back({spec[i].name, *weights.layer(i).kernel,
                       std::vector<float>(b.begin(), b.end())});
  }
  stwt::write(path, entries);
}

WeightStore random_weights(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ConvWeights> layers;
  for (const ConvLayerSpec& l : vgg16_layers()) {
    const double stddev = std::sqrt(2.0 / (9.0 * static_cast<double>(l.in_channels)));
    Tensor kernel(kernel_shape(l));
    for (float& v : kernel.data()) v = static_cast<float>(rng.normal() * stddev);
    layers.push_back({std::make_shared<const Tensor>(std::move(kernel)),
                      std::make_shared<const Tensor>(Shape{l.out_channels}, 0.0f)});
  }
  return WeightStore(std::move(layers), WeightSource::SeededRandom);
}

std::string activation_entry_name(std::size_t conv_index) {
  return "act_conv" + std::to_string(conv_index);
}

std::vector<Tensor> load_activations(const std::filesystem::path& path,
                                     const NetworkSpec& spec) {
  auto entries = stwt::read(path);
  std::vector<Tensor> out;
  for (std::size_t k : spec.keep_set()) {
    const std::string name = activation_entry_name(k);
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const stwt::Entry& e) { return e.name == name; });
    if (it == entries.end()) {
      throw SpecError(path.string() + ": missing entry " + name);
    }
    Tensor t = std::move(it->tensor);
    if (t.rank() == 4 && t.dim(0) == 1) {
      t = t.reshaped({t.dim(1), t.dim(2), t.dim(3)});
    }
    const std::size_t channels = spec.layers()[k - 1].out_channels;
    if (t.rank() != 3 || t.dim(0) != channels) {
      throw SpecError(path.string() + ": " + name + " has shape " +
                      shape_string(t.shape()) + ", expected [" +
                      std::to_string(channels) + ",H,W]");
    }
    out.push_back(std::move(t));
  }
  return out;
}

void save_activations(const std::filesystem::path& path,
                      std::span<const Tensor> activations,
                      const NetworkSpec& spec) {
  if (activations.size() != spec.keep_set().size()) {
    throw PreconditionError("activation count does not match keep set");
  }
  std::vector<stwt::Entry> entries;
  for (std::size_t i = 0; i < activations.size(); ++i) {
    entries.push_back({activation_entry_name(spec.keep_set()[i]), activations[i], {}});
  }
  stwt::write(path, entries);
}

template <typename T>
std::vector<BasicVar<T>> forward_features(BasicVar<T> image,
                                          const WeightStore& weights,
                                          const NetworkSpec& spec) {
  const Shape& s = image.shape();
  if (s.size() != 3 || s[0] != 3) {
    throw ShapeError("forward_features expects [3,H,W], got " + shape_string(s));
  }
  const std::size_t min_side = spec.min_input_side();
  if (s[1] < min_side || s[2] < min_side) {
    throw PreconditionError("image " + std::to_string(s[1]) + "x" +
                            std::to_string(s[2]) + " is smaller than the minimum side " +
                            std::to_string(min_side));
  }
  BasicGraph<T>& g = image.graph();
  BasicTensor<T> mean_t({3, 1, 1}), std_t({3, 1, 1});
  for (std::size_t c = 0; c < 3; ++c) {
    mean_t[c] = static_cast<T>(kChannelMean[c]);
    std_t[c] = static_cast<T>(kChannelStd[c]);
  }
  BasicVar<T> x = (image - g.constant(std::move(mean_t))) / g.constant(std::move(std_t));

  std::vector<BasicVar<T>> kept;
  auto next_kept = spec.keep_set().begin();
  for (std::size_t i = 0; i < spec.depth(); ++i) {
    const ConvLayerSpec& layer = spec.layers()[i];
    if (layer.pool_before) x = maxpool2(x);
    const ConvWeights& w = weights.layer(i);
    x = relu(conv2d(x, weight_constant(g, w.kernel), weight_constant(g, w.bias)));
    if (next_kept != spec.keep_set().end() && *next_kept == i + 1) {
      kept.push_back(x);
      ++next_kept;
    }
  }
  return kept;
}

std::vector<std::shared_ptr<const Tensor>> extract_activations(
    const Tensor& image, const WeightStore& weights, const NetworkSpec& spec) {
  Graph g;
  const auto acts = forward_features(g.constant(image), weights, spec);
  std::vector<std::shared_ptr<const Tensor>> out;
  for (const Var& a : acts) out.push_back(g.shared_value(a));
  return out;
}

template <typename T>
BasicFeatureMatrix<T> sample_hypercolumns(std::span<const BasicVar<T>> activations,
                                          Extent image,
                                          std::span<const Coord> coords) {
  if (activations.empty()) throw PreconditionError("no activations to sample");
  if (coords.empty()) throw PreconditionError("no coordinates to sample");
  for (const Coord& c : coords) {
    if (!(c.y >= 0.0 && c.x >= 0.0 && c.y <= static_cast<double>(image.height) - 1.0 &&
          c.x <= static_cast<double>(image.width) - 1.0)) {
      throw PreconditionError("coordinate (" + std::to_string(c.y) + ", " +
                              std::to_string(c.x) + ") outside " +
                              std::to_string(image.height) + "x" +
                              std::to_string(image.width) + " image");
    }
  }
  auto to_layer = [](double v, std::size_t full, std::size_t layer) {
    const double mapped =
        (v + 0.5) * static_cast<double>(layer) / static_cast<double>(full) - 0.5;
    return std::clamp(mapped, 0.0, static_cast<double>(layer) - 1.0);
  };
  std::vector<BasicVar<T>> parts;
  std::vector<Coord> scaled(coords.size());
  for (const BasicVar<T>& act : activations) {
    const std::size_t h = act.shape()[1], w = act.shape()[2];
    for (std::size_t i = 0; i < coords.size(); ++i) {
      scaled[i] = {to_layer(coords[i].y, image.height, h),
                   to_layer(coords[i].x, image.width, w)};
    }
    parts.push_back(bilinear_sample(act, std::span<const Coord>(scaled)));
  }
  BasicVar<T> values = parts.size() == 1
                           ? parts.front()
                           : concat(std::span<const BasicVar<T>>(parts), 1);
  return {values, std::vector<Coord>(coords.begin(), coords.end())};
}

#define STROTSS_INSTANTIATE(T)                                                  \
  template std::vector<BasicVar<T>> forward_features(                           \
      BasicVar<T>, const WeightStore&, const NetworkSpec&);                     \
  template BasicFeatureMatrix<T> sample_hypercolumns(                           \
      std::span<const BasicVar<T>>, Extent, std::span<const Coord>);

STROTSS_INSTANTIATE(float)
STROTSS_INSTANTIATE(double)
#undef STROTSS_INSTANTIATE

}  // namespace strotss
