#pragma once

#include <array>

#include "glioseg/tensor.hpp"
#include "glioseg/volume.hpp"

namespace glioseg {

enum class Region { WT = 0, TC = 1, ET = 2 };

inline constexpr std::array<Region, 3> kRegions = {Region::WT, Region::TC, Region::ET};

const char* region_name(Region r);

struct FusionConfig {
  double threshold = 0.5;
  void validate() const;
};

// Nested-region targets from a label map, channel order (WT, TC, ET):
// WT = {1,2,4}, TC = {1,4}, ET = {4}. Throws on any other label value.
Tensor4 labels_to_channels(const LabelMap& labels);

// Same mapping as binary masks, for the metrics module.
std::array<BinaryMask, 3> region_masks(const LabelMap& labels);

// Per voxel: ET wins over TC, TC over WT, once the probability clears the
// threshold (ties labeled). ET -> 4, TC -> 1, WT -> 2, else background.
LabelMap fuse(const ProbabilityMaps& probs, const FusionConfig& cfg);

}  // namespace glioseg
