#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glioseg/volume.hpp"

namespace glioseg {

// The seven regression inputs: three volume ratios (region voxels / brain
// voxels), three surface terms, and age. Region nesting carries over to the
// ratios: ratio_et <= ratio_tc <= ratio_wt.
struct FeatureVector {
  double ratio_wt = 0.0, ratio_tc = 0.0, ratio_et = 0.0;
  double surface_wt = 0.0, surface_tc = 0.0, surface_et = 0.0;
  double age = 0.0;

  std::array<double, 7> as_array() const {
    return {ratio_wt, ratio_tc, ratio_et, surface_wt, surface_tc, surface_et, age};
  }
  static FeatureVector from_array(const std::array<double, 7>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
  }
};

// "Surface" of a binary region mask, computed from central-difference
// gradients (zero padding at the borders). The default sums gradient
// magnitudes; the alternative counts voxels with a nonzero gradient.
enum class SurfaceMode { GradientMagnitudeSum, NonzeroGradientCount };

FeatureVector extract_features(const LabelMap& labels, const BinaryMask& brain, double age,
                               SurfaceMode mode = SurfaceMode::GradientMagnitudeSum);

// Keeps only records with gross total resection.
std::vector<SurvivalRecord> filter_gtr(const std::vector<SurvivalRecord>& records);

enum class OSBucket { Short, Mid, Long };

// <300 short, 300..450 mid (inclusive), >450 long.
OSBucket bucket(double days);
const char* bucket_name(OSBucket b);

struct OSModelConfig {
  int hidden_layers = 2;
  int hidden_units = 64;
  double lr = 1e-4;
  double lr_decay = 0.5;
  int plateau_patience = 10;
  double plateau_min_delta = 1e-4;
  int folds = 5;
  int batch_size = 5;
  int epochs = 500;
  float leaky_slope = 0.01f;

  void validate() const;
};

// One cross-validation member: feature/target standardization fitted on its
// training folds, plus the dense-layer weights (row-major [out][in]).
struct OSFold {
  std::array<float, 7> feat_mu{}, feat_sd{};
  float target_mu = 0.0f;
  float target_sd = 1.0f;
  std::vector<float> w1, b1, w2, b2, w3, b3;
};

// Deliverable regressor: the mean of the fold models' outputs, clamped to
// non-negative days.
struct OSModel {
  OSModelConfig config;
  std::uint64_t seed = 0;
  std::vector<OSFold> folds;

  double predict(const FeatureVector& features) const;

  void save(const std::filesystem::path& path) const;
  static OSModel load(const std::filesystem::path& path);
};

double predict_os(const OSModel& model, const FeatureVector& features);

struct OSTrainExample {
  std::string id;
  FeatureVector features;
  double days = 0.0;
};

struct OSTrainResult {
  OSModel model;
  std::vector<double> fold_val_mse;  // days^2, one per fold
  double mean_val_mse = 0.0;
};

// Five-fold cross-validated training: shuffled round-robin fold assignment,
// per-fold feature and target standardization, Adam with the plateau LR rule.
OSTrainResult train_os(const std::vector<OSTrainExample>& examples, const OSModelConfig& cfg,
                       std::uint64_t seed);

struct OSEvaluation {
  double accuracy = 0.0;   // fraction of matching buckets
  double mse = 0.0;        // days^2
  double median_se = 0.0;
  double std_se = 0.0;     // population std of squared errors
  double spearman_r = 0.0; // rank correlation, average ranks on ties
};

OSEvaluation evaluate_os(const std::vector<double>& predictions,
                         const std::vector<double>& truths);

// Feature table round trip (header row, one subject per row).
void save_features_csv(const std::vector<std::pair<std::string, FeatureVector>>& rows,
                       const std::filesystem::path& path);
std::vector<std::pair<std::string, FeatureVector>> load_features_csv(
    const std::filesystem::path& path);

}  // namespace glioseg
