#pragma once

#include <random>

#include "glioseg/tensor.hpp"

namespace glioseg {

// Training-time augmentation. Every transform is applied with the same
// spatial parameters to the image stack and the target channels; interpolated
// targets are re-binarized at 0.5. Trilinear interpolation with shared sample
// coordinates is monotone across channels, so nested targets stay nested.
struct AugmentOptions {
  bool flip = true;            // per-axis mirror, each axis with probability 1/2
  bool rot90 = true;           // right-angle rotation about a random axis
  bool small_rotation = true;  // interpolated rotation, angle within max_angle_deg
  bool elastic = true;         // smooth random displacement field

  float max_angle_deg = 10.0f;
  int elastic_grid = 8;           // control points per axis
  float elastic_sigma_vox = 2.0f; // std-dev of control displacements, voxels
  float apply_prob = 0.5f;        // chance each enabled transform fires
};

// Exposed as standalone ops so the geometry is testable in isolation.
Tensor4 flip_axis(const Tensor4& x, int axis);
Tensor4 rotate90(const Tensor4& x, int axis, int quarter_turns);

void augment_pair(Tensor4& image, Tensor4& target, const AugmentOptions& opt,
                  std::mt19937_64& rng);

}  // namespace glioseg
