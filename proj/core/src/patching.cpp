#include "glioseg/patching.hpp"

#include <algorithm>
#include <set>

namespace glioseg {

namespace {

// Floor division, correct for negative numerators.
int floor_div(int a, int b) {
  int q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

// Single start centered on a box whose extent is below the patch size.
int centered_start(int lo, int extent, int patch) {
  return lo - (patch - extent) / 2;
}

std::vector<int> axis_grid_positions(int lo, int hi, int patch, int stride, int offset) {
  const int extent = hi - lo + 1;
  if (extent < patch) return {centered_start(lo, extent, patch)};
  const int last = hi + 1 - patch;
  std::vector<int> positions;
  for (int p = lo - offset;; p += stride) {
    if (p >= last) {
      positions.push_back(last);  // snap: final patch ends flush with the box
      break;
    }
    positions.push_back(p);
  }
  return positions;
}

std::vector<PatchSpec> product_with_center(const std::array<std::vector<int>, 3>& axis_starts,
                                           const BrainBox& box, int patch) {
  std::vector<PatchSpec> specs;
  for (int sx : axis_starts[0])
    for (int sy : axis_starts[1])
      for (int sz : axis_starts[2]) specs.push_back({{sx, sy, sz}, patch});
  specs.push_back({center_patch_start(box, patch), patch});

  // Dedup by exact start equality, keeping first occurrence.
  std::vector<PatchSpec> unique;
  std::set<std::array<int, 3>> seen;
  for (const PatchSpec& s : specs)
    if (seen.insert(s.start).second) unique.push_back(s);
  return unique;
}

}  // namespace

void PatchConfig::validate() const {
  if (patch_size <= 0) throw ConfigError("patch_size must be positive");
  if (overlap <= 0 || overlap >= patch_size)
    throw ConfigError("overlap must satisfy 0 < overlap < patch_size");
  if (start_offset_max < 0) throw ConfigError("start_offset_max must be non-negative");
}

std::array<int, 3> center_patch_start(const BrainBox& box, int patch_size) {
  std::array<int, 3> start;
  for (int a = 0; a < 3; ++a)
    start[a] = floor_div(box.lo[a] + box.hi[a] + 1 - patch_size, 2);
  return start;
}

std::vector<PatchSpec> patches_random_grid(const BrainBox& box, const PatchConfig& cfg,
                                           std::mt19937_64& rng) {
  cfg.validate();
  std::uniform_int_distribution<int> offset_dist(0, cfg.start_offset_max);
  std::array<std::vector<int>, 3> axis_starts;
  for (int a = 0; a < 3; ++a) {
    int offset = offset_dist(rng);
    axis_starts[a] =
        axis_grid_positions(box.lo[a], box.hi[a], cfg.patch_size, cfg.stride(), offset);
  }
  return product_with_center(axis_starts, box, cfg.patch_size);
}

std::vector<PatchSpec> patches_corner_anchored(const BrainBox& box, const PatchConfig& cfg) {
  cfg.validate();
  std::array<std::vector<int>, 3> axis_starts;
  for (int a = 0; a < 3; ++a) {
    const int extent = box.extent(a);
    if (extent < cfg.patch_size) {
      axis_starts[a] = {centered_start(box.lo[a], extent, cfg.patch_size)};
    } else {
      axis_starts[a] = {box.lo[a]};
      int far_start = box.hi[a] + 1 - cfg.patch_size;
      if (far_start != box.lo[a]) axis_starts[a].push_back(far_start);
    }
  }
  return product_with_center(axis_starts, box, cfg.patch_size);
}

Tensor4 extract_patch(const Subject& subject, const PatchSpec& spec) {
  const int p = spec.size;
  Tensor4 patch(4, {p, p, p});
  const Shape3 full = subject.modality(Modality::T1).shape;
  for (int c = 0; c < 4; ++c) {
    const Volume& vol = subject.modalities[c];
    float* dst = patch.channel(c);
    for (int z = 0; z < p; ++z) {
      int vz = spec.start[2] + z;
      if (vz < 0 || vz >= full.nz) continue;
      for (int y = 0; y < p; ++y) {
        int vy = spec.start[1] + y;
        if (vy < 0 || vy >= full.ny) continue;
        int x0 = std::max(0, -spec.start[0]);
        int x1 = std::min(p, full.nx - spec.start[0]);
        if (x0 >= x1) continue;
        const float* src = &vol.data[vol.index(spec.start[0] + x0, vy, vz)];
        std::copy(src, src + (x1 - x0), dst + (static_cast<std::size_t>(z) * p + y) * p + x0);
      }
    }
  }
  return patch;
}

LabelMap extract_label_patch(const LabelMap& labels, const PatchSpec& spec) {
  const int p = spec.size;
  LabelMap patch({p, p, p});
  patch.spacing = labels.spacing;
  const Shape3 full = labels.shape;
  for (int z = 0; z < p; ++z) {
    int vz = spec.start[2] + z;
    if (vz < 0 || vz >= full.nz) continue;
    for (int y = 0; y < p; ++y) {
      int vy = spec.start[1] + y;
      if (vy < 0 || vy >= full.ny) continue;
      int x0 = std::max(0, -spec.start[0]);
      int x1 = std::min(p, full.nx - spec.start[0]);
      if (x0 >= x1) continue;
      const std::uint8_t* src = &labels.data[labels.index(spec.start[0] + x0, vy, vz)];
      std::copy(src, src + (x1 - x0), &patch.data[patch.index(x0, y, z)]);
    }
  }
  return patch;
}

ProbabilityMaps reconstruct(const std::vector<Tensor4>& prob_patches,
                            const std::vector<PatchSpec>& specs, Shape3 full_shape) {
  if (prob_patches.size() != specs.size())
    throw DataError("reconstruct: " + std::to_string(prob_patches.size()) + " patches for " +
                    std::to_string(specs.size()) + " specs");
  if (prob_patches.empty()) throw DataError("reconstruct: no patches");
  const int channels = prob_patches.front().channels;

  Tensor4 sum(channels, full_shape, 0.0f);
  std::vector<std::uint16_t> cover(static_cast<std::size_t>(full_shape.count()), 0);

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const PatchSpec& spec = specs[i];
    const Tensor4& patch = prob_patches[i];
    const int p = spec.size;
    if (patch.channels != channels || patch.shape.nx != p || patch.shape.ny != p ||
        patch.shape.nz != p)
      throw DataError("reconstruct: patch tensor does not match its spec");

    int z0 = std::max(0, -spec.start[2]), z1 = std::min(p, full_shape.nz - spec.start[2]);
    int y0 = std::max(0, -spec.start[1]), y1 = std::min(p, full_shape.ny - spec.start[1]);
    int x0 = std::max(0, -spec.start[0]), x1 = std::min(p, full_shape.nx - spec.start[0]);
    if (x1 <= x0) continue;
    const std::size_t run = static_cast<std::size_t>(x1 - x0);
    for (int z = z0; z < z1; ++z)
      for (int y = y0; y < y1; ++y) {
        std::size_t full_row = sum.index(0, spec.start[0] + x0, spec.start[1] + y, spec.start[2] + z);
        std::size_t patch_row = patch.index(0, x0, y, z);
        for (int c = 0; c < channels; ++c) {
          float* dst = sum.v.data() + full_row + static_cast<std::size_t>(c) * sum.plane();
          const float* src = patch.v.data() + patch_row + static_cast<std::size_t>(c) * patch.plane();
          for (std::size_t k = 0; k < run; ++k) dst[k] += src[k];
        }
        std::uint16_t* cov = cover.data() + full_row;
        for (std::size_t k = 0; k < run; ++k) ++cov[k];
      }
  }

  const std::size_t plane = sum.plane();
  for (int c = 0; c < channels; ++c) {
    float* ch = sum.channel(c);
    for (std::size_t i = 0; i < plane; ++i)
      if (cover[i]) ch[i] /= static_cast<float>(cover[i]);
  }
  return sum;
}

}  // namespace glioseg
