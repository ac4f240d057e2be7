#pragma once

#include <vector>

#include "glioseg/volume.hpp"

namespace glioseg {

// Channel-major voxel tensor; within a channel the layout matches Volume
// (x fastest). Used for network activations and multi-channel maps.
struct Tensor4 {
  int channels = 0;
  Shape3 shape;
  std::vector<float> v;

  Tensor4() = default;
  Tensor4(int c, Shape3 s, float fill = 0.0f)
      : channels(c), shape(s), v(static_cast<std::size_t>(c) * s.count(), fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(shape.count()); }
  std::size_t size() const { return v.size(); }

  std::size_t index(int c, int x, int y, int z) const {
    return (static_cast<std::size_t>(c) * shape.nz + z) * shape.ny * shape.nx +
           static_cast<std::size_t>(y) * shape.nx + x;
  }
  float& at(int c, int x, int y, int z) { return v[index(c, x, y, z)]; }
  float at(int c, int x, int y, int z) const { return v[index(c, x, y, z)]; }

  float* channel(int c) { return v.data() + static_cast<std::size_t>(c) * plane(); }
  const float* channel(int c) const { return v.data() + static_cast<std::size_t>(c) * plane(); }

  bool same_layout(const Tensor4& o) const { return channels == o.channels && shape == o.shape; }
};

// Per-voxel confidences for the nested regions, channel order (WT, TC, ET).
using ProbabilityMaps = Tensor4;

}  // namespace glioseg
