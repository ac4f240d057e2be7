#include "glioseg/labelfuse.hpp"

#include <string>

namespace glioseg {

const char* region_name(Region r) {
  switch (r) {
    case Region::WT: return "WT";
    case Region::TC: return "TC";
    case Region::ET: return "ET";
  }
  return "";
}

void FusionConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("fusion threshold must lie in (0, 1)");
}

Tensor4 labels_to_channels(const LabelMap& labels) {
  Tensor4 channels(3, labels.shape, 0.0f);
  float* wt = channels.channel(0);
  float* tc = channels.channel(1);
  float* et = channels.channel(2);
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    switch (labels.data[i]) {
      case 0: break;
      case 2: wt[i] = 1.0f; break;
      case 1: wt[i] = 1.0f; tc[i] = 1.0f; break;
      case 4: wt[i] = 1.0f; tc[i] = 1.0f; et[i] = 1.0f; break;
      default:
        throw DataError("illegal label value " + std::to_string(int(labels.data[i])));
    }
  }
  return channels;
}

std::array<BinaryMask, 3> region_masks(const LabelMap& labels) {
  std::array<BinaryMask, 3> masks{BinaryMask(labels.shape), BinaryMask(labels.shape),
                                  BinaryMask(labels.shape)};
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    switch (labels.data[i]) {
      case 0: break;
      case 2: masks[0].data[i] = 1; break;
      case 1: masks[0].data[i] = 1; masks[1].data[i] = 1; break;
      case 4: masks[0].data[i] = 1; masks[1].data[i] = 1; masks[2].data[i] = 1; break;
      default:
        throw DataError("illegal label value " + std::to_string(int(labels.data[i])));
    }
  }
  return masks;
}

LabelMap fuse(const ProbabilityMaps& probs, const FusionConfig& cfg) {
  cfg.validate();
  if (probs.channels != 3) throw DataError("fuse expects 3-channel probability maps");
  LabelMap out(probs.shape);
  const float t = static_cast<float>(cfg.threshold);
  const float* wt = probs.channel(0);
  const float* tc = probs.channel(1);
  const float* et = probs.channel(2);
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    if (et[i] >= t)
      out.data[i] = 4;
    else if (tc[i] >= t)
      out.data[i] = 1;
    else if (wt[i] >= t)
      out.data[i] = 2;
  }
  return out;
}

}  // namespace glioseg
