#pragma once

#include <array>
#include <random>
#include <vector>

#include "glioseg/preprocess.hpp"
#include "glioseg/tensor.hpp"
#include "glioseg/volume.hpp"

namespace glioseg {

struct PatchConfig {
  int patch_size = 128;
  int overlap = 32;
  int start_offset_max = 4;

  int stride() const { return patch_size - overlap; }
  void validate() const;
};

// Cubic patch in full-volume coordinates. Starts may be negative or run past
// the volume; out-of-volume voxels are zero-padded on extraction.
struct PatchSpec {
  std::array<int, 3> start{0, 0, 0};
  int size = 0;

  bool operator==(const PatchSpec&) const = default;
};

// Training strategy A: a regular grid whose first position per axis starts a
// random 0..start_offset_max voxels outside the brain box; the last grid
// position is snapped so the final patch ends flush with the box. The fixed
// center patch is appended and exact-duplicate specs are removed.
std::vector<PatchSpec> patches_random_grid(const BrainBox& box, const PatchConfig& cfg,
                                           std::mt19937_64& rng);

// Training strategy B (also the prediction strategy): one patch anchored at
// each box corner, plus the fixed center patch; deterministic. Covers the box
// whenever every extent is at most twice the patch size.
std::vector<PatchSpec> patches_corner_anchored(const BrainBox& box, const PatchConfig& cfg);

// Start of the patch centered on the box (floor rounding).
std::array<int, 3> center_patch_start(const BrainBox& box, int patch_size);

// Stack the four modalities into a (4 x p^3) tensor; voxels outside the
// volume are zero.
Tensor4 extract_patch(const Subject& subject, const PatchSpec& spec);

// Cut a label-map patch with zero padding.
LabelMap extract_label_patch(const LabelMap& labels, const PatchSpec& spec);

// Overlap-average per-patch probability maps back into a full-size tensor.
// Voxels covered by no patch are 0.
ProbabilityMaps reconstruct(const std::vector<Tensor4>& prob_patches,
                            const std::vector<PatchSpec>& specs, Shape3 full_shape);

}  // namespace glioseg
