#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "strotss/graph.hpp"

namespace strotss {

struct ConvLayerSpec {
  std::string name;  // "conv1_1" ... "conv5_3"
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  bool pool_before = false;  // a 2x2 max pool precedes this conv
};

// VGG16 convolution stack plus the subset of layers ("keep set", 1-based
// over conv layers) whose post-relu activations form hypercolumns.
class NetworkSpec {
 public:
  static std::vector<std::size_t> default_keep_set();
  static NetworkSpec vgg16(std::vector<std::size_t> keep_set = default_keep_set());

  const std::vector<ConvLayerSpec>& layers() const noexcept { return layers_; }
  const std::vector<std::size_t>& keep_set() const noexcept { return keep_set_; }
  std::vector<std::size_t> kept_channels() const;
  std::size_t hypercolumn_dim() const;
  // Number of conv layers that must run to produce every kept activation.
  std::size_t depth() const noexcept { return keep_set_.back(); }
  // Smallest image side for which the deepest kept layer is at least 1x1.
  std::size_t min_input_side() const;

 private:
  std::vector<ConvLayerSpec> layers_;
  std::vector<std::size_t> keep_set_;
};

enum class WeightSource { File, SeededRandom };

struct ConvWeights {
  std::shared_ptr<const Tensor> kernel;  // [Cout,Cin,3,3]
  std::shared_ptr<const Tensor> bias;    // [Cout]
};

// Immutable per-layer kernels and biases for all 13 VGG16 conv layers.
class WeightStore {
 public:
  // Throws SpecError unless shapes match VGG16 exactly and all values are
  // finite.
  WeightStore(std::vector<ConvWeights> layers, WeightSource source);

  std::size_t size() const noexcept { return layers_.size(); }
  const ConvWeights& layer(std::size_t index) const { return layers_.at(index); }
  WeightSource source() const noexcept { return source_; }

  friend bool operator==(const WeightStore& a, const WeightStore& b);

 private:
  std::vector<ConvWeights> layers_;
  WeightSource source_;
};

WeightStore load_weights(const std::filesystem::path& path);
void save_weights(const std::filesystem::path& path, const WeightStore& weights);

// Kernels ~ N(0, sqrt(2 / (9 Cin))), biases 0.
WeightStore random_weights(std::uint64_t seed);

// Reference activation files hold one "act_conv<k>" entry per kept layer.
std::string activation_entry_name(std::size_t conv_index);
std::vector<Tensor> load_activations(const std::filesystem::path& path,
                                     const NetworkSpec& spec);
void save_activations(const std::filesystem::path& path,
                      std::span<const Tensor> activations,
                      const NetworkSpec& spec);

// ImageNet channel statistics applied before the first conv.
inline constexpr float kChannelMean[3] = {0.485f, 0.456f, 0.406f};
inline constexpr float kChannelStd[3] = {0.229f, 0.224f, 0.225f};

// Runs image [3,H,W] through the network and returns the post-relu
// activations of the kept layers at their native resolutions.
template <typename T>
std::vector<BasicVar<T>> forward_features(BasicVar<T> image,
                                          const WeightStore& weights,
                                          const NetworkSpec& spec);

// Graph-free forward pass; results can be shared as graph constants.
std::vector<std::shared_ptr<const Tensor>> extract_activations(
    const Tensor& image, const WeightStore& weights, const NetworkSpec& spec);

template <typename T>
struct BasicFeatureMatrix {
  BasicVar<T> values;  // [n,d]
  std::vector<Coord> coords;

  std::size_t rows() const { return values.shape()[0]; }
  std::size_t dim() const { return values.shape()[1]; }
};
using FeatureMatrix = BasicFeatureMatrix<float>;

// Hypercolumns at full-resolution coords. Each activation is sampled at the
// coordinate mapped into its own grid with the same half-pixel convention
// as bilinear_resize, so this equals upsample-then-index.
template <typename T>
BasicFeatureMatrix<T> sample_hypercolumns(std::span<const BasicVar<T>> activations,
                                          Extent image,
                                          std::span<const Coord> coords);

}  // namespace strotss
