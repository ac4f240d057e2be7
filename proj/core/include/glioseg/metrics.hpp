#pragma once

#include <array>
#include <limits>
#include <vector>

#include "glioseg/volume.hpp"

namespace glioseg {

// Sentinel for Hausdorff95 when exactly one mask is empty; reports print it
// as "inf" and corpus means exclude it.
inline constexpr double kHD95Inf = std::numeric_limits<double>::infinity();

struct RegionScores {
  double dice = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double hausdorff95 = 0.0;  // mm, or kHD95Inf
};

// Overlap scores with the usual degenerate conventions: an empty denominator
// counts as a perfect score (nothing to miss).
double dice(const BinaryMask& pred, const BinaryMask& gt);
double sensitivity(const BinaryMask& pred, const BinaryMask& gt);
double specificity(const BinaryMask& pred, const BinaryMask& gt);

// 95th percentile (linear interpolation between order statistics) of the
// pooled directed distances between the two mask surfaces, in mm. A surface
// voxel is a mask voxel with a face-adjacent background neighbor; volume
// borders count as background. Both masks empty -> 0; exactly one empty ->
// kHD95Inf.
double hausdorff95(const BinaryMask& pred, const BinaryMask& gt, Spacing3 spacing);

// Exposed for testing against brute-force oracles.
BinaryMask surface_voxels(const BinaryMask& mask);
std::vector<double> squared_distance_field(const BinaryMask& seeds, Spacing3 spacing);

// Scores per region, order (WT, TC, ET).
std::array<RegionScores, 3> evaluate_subject(const LabelMap& pred, const LabelMap& gt,
                                             Spacing3 spacing);

struct RegionMeans {
  double dice = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double hausdorff95 = 0.0;       // mean over finite values only
  std::size_t hd95_excluded = 0;  // how many infinite values were left out
};

std::array<RegionMeans, 3> corpus_means(
    const std::vector<std::array<RegionScores, 3>>& per_subject);

}  // namespace glioseg
