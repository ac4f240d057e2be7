#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "glioseg/layers.hpp"
#include "glioseg/tensor.hpp"

namespace glioseg {

// Network geometry. Default values give the full-size model; tests shrink
// depth/base_filters/patch_size for speed.
struct SegModelConfig {
  int in_channels = 4;
  int out_channels = 3;
  int patch_size = 128;
  int depth = 5;          // resolution levels, including the bottleneck
  int base_filters = 16;  // channels at full resolution; doubles per level
  int convs_per_block = 2;
  float leaky_slope = 0.01f;

  int filters(int level) const { return base_filters << level; }
  void validate() const;
};

// Stack of 3x3x3 conv blocks with an identity shortcut around the whole stack.
struct ResidualStack {
  std::vector<ConvBlock> blocks;

  ResidualStack() = default;
  ResidualStack(int channels, int count, float slope) {
    blocks.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) blocks.emplace_back(channels, channels, 3, 1, slope);
  }

  Tensor4 forward(const Tensor4& x, bool train);
  Tensor4 backward(const Tensor4& g);
};

// Residual 3D U-Net over four-modality patches, producing one sigmoid
// probability map per tumor region. Encoder halves resolution with strided
// conv blocks; decoder doubles it with nearest-neighbor upsampling and
// concatenated skip connections. Single sample at a time, CPU only.
class SegModel {
 public:
  SegModel() = default;
  SegModel(const SegModelConfig& cfg, std::uint64_t seed);

  // Input: [in_channels, p, p, p]. Output: [out_channels, p, p, p] in (0, 1).
  ProbabilityMaps forward(const Tensor4& input, bool train = false);

  // grad_out is dLoss/dOutput from the most recent forward(train=true).
  void backward(const Tensor4& grad_out);

  std::vector<ParamView> parameters();
  std::size_t parameter_count();
  void zero_grad();

  const SegModelConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }

  void save(const std::filesystem::path& path) const;
  static SegModel load(const std::filesystem::path& path);

 private:
  SegModelConfig cfg_;
  std::uint64_t seed_ = 0;

  ConvBlock stem_;                  // in_channels -> base_filters
  std::vector<ResidualStack> enc_;  // one per level
  std::vector<ConvBlock> down_;     // stride-2 transitions, level l-1 -> l
  std::vector<ConvBlock> dec_a_;    // post-concat fusion, per decoder level
  std::vector<ConvBlock> dec_b_;
  Conv3d head_;  // 1x1x1 -> out_channels

  // forward caches consumed by backward()
  std::vector<Tensor4> skips_;
  std::vector<Shape3> up_in_shape_;
  Tensor4 sigmoid_out_;
};

}  // namespace glioseg
