#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "glioseg/volume.hpp"

namespace glioseg {

// Pooled mean/std of nonzero voxels over all training images, per modality.
struct NormStats {
  struct ModalityStats {
    double mean = 0.0;
    double stddev = 0.0;
  };
  std::array<ModalityStats, 4> per_modality;  // indexed by Modality

  const ModalityStats& of(Modality m) const { return per_modality[static_cast<int>(m)]; }
  ModalityStats& of(Modality m) { return per_modality[static_cast<int>(m)]; }
};

// Minimal axis-aligned box enclosing all nonzero voxels, inclusive bounds.
struct BrainBox {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};

  bool operator==(const BrainBox&) const = default;
  int extent(int axis) const { return hi[axis] - lo[axis] + 1; }
  bool contains(int x, int y, int z) const {
    return x >= lo[0] && x <= hi[0] && y >= lo[1] && y <= hi[1] && z >= lo[2] && z <= hi[2];
  }
};

// True exactly where the voxel is nonzero.
BinaryMask brain_mask(const Volume& volume);

// Union of the four per-modality masks; all modalities share one box.
BinaryMask union_brain_mask(const Subject& subject);

// Throws DataError("no brain voxels") on an empty mask.
BrainBox bounding_box(const BinaryMask& mask);

// Streaming mean/std accumulator (Welford) so a training corpus never has to
// be resident in memory at once.
class NormAccumulator {
 public:
  void add(const Subject& subject);
  void add_volume(Modality m, const Volume& volume);
  NormStats finish() const;

 private:
  struct State {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
  };
  std::array<State, 4> state_;
};

NormStats fit_norm_stats(const std::vector<Subject>& subjects);

// z-score of nonzero voxels; zero voxels stay exactly 0.
Volume normalize(const Volume& volume, double mean, double stddev);

// Affine map of masked voxels onto [10, 110]; background stays 0.
// The mask must come from the raw volume: a brain voxel whose z-score is 0
// is still brain and still gets scaled.
Volume scale(const Volume& zscored, const BinaryMask& mask);

// normalize + scale for all four modalities; label and metadata pass through.
Subject preprocess_subject(const Subject& subject, const NormStats& stats);

// Text stats file, one modality per entry with fields mu and sigma.
void save_norm_stats(const NormStats& stats, const std::filesystem::path& path);
NormStats load_norm_stats(const std::filesystem::path& path);

}  // namespace glioseg
