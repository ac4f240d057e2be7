#include <doctest.h>

#include <cmath>
#include <random>

#include "glioseg/survival.hpp"
#include "support/synthetic.hpp"

using namespace glioseg;
using testsup::TempDir;

namespace {

bool in_wt(std::uint8_t v) { return v == 1 || v == 2 || v == 4; }
bool in_tc(std::uint8_t v) { return v == 1 || v == 4; }
bool in_et(std::uint8_t v) { return v == 4; }

// brain mask covering the whole frame
BinaryMask full_brain(Shape3 shape) { return BinaryMask(shape, 1); }

// days as a fixed affine function of the features, clamped to a plausible
// range; spans all three survival groups
double linear_days(const FeatureVector& f, double noise = 0.0) {
  const double d = 1500.0 * f.ratio_wt + 900.0 * f.ratio_tc - 400.0 * f.ratio_et +
                   0.4 * f.surface_wt + 6.0 * (80.0 - f.age) + 60.0 + noise;
  return std::max(5.0, std::min(950.0, d));
}

std::vector<OSTrainExample> linear_fixture(int n, std::uint64_t seed, double noise_scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, noise_scale);
  std::vector<OSTrainExample> out;
  for (int i = 0; i < n; ++i) {
    FeatureVector f;
    f.ratio_wt = 0.02 + 0.28 * u(rng);
    f.ratio_tc = f.ratio_wt * u(rng);
    f.ratio_et = f.ratio_tc * u(rng);
    f.surface_wt = 400.0 + 500.0 * u(rng);
    f.surface_tc = f.surface_wt * u(rng);
    f.surface_et = f.surface_tc * u(rng);
    f.age = 35.0 + 45.0 * u(rng);
    out.push_back({"r" + std::to_string(i), f, linear_days(f, gauss(rng))});
  }
  return out;
}

}  // namespace

TEST_CASE("feature ratios divide region volume by brain volume") {
  const Shape3 shape{10, 10, 10};  // 1000-voxel brain
  LabelMap labels(shape);
  int placed = 0;
  // 50 edema + 40 necrotic + 10 enhancing = 100 whole / 50 core / 10 enhancing
  for (int i = 0; i < 50; ++i) labels.data[placed++] = 2;
  for (int i = 0; i < 40; ++i) labels.data[placed++] = 1;
  for (int i = 0; i < 10; ++i) labels.data[placed++] = 4;

  const FeatureVector f = extract_features(labels, full_brain(shape), 61.5);
  CHECK(f.ratio_wt == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(f.ratio_tc == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(f.ratio_et == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(f.age == 61.5);
}

TEST_CASE("an empty tumor has zero ratios and zero surfaces") {
  const Shape3 shape{6, 6, 6};
  const FeatureVector f = extract_features(LabelMap(shape), full_brain(shape), 50.0);
  CHECK(f.ratio_wt == 0.0);
  CHECK(f.ratio_tc == 0.0);
  CHECK(f.ratio_et == 0.0);
  CHECK(f.surface_wt == 0.0);
  CHECK(f.surface_tc == 0.0);
  CHECK(f.surface_et == 0.0);
}

TEST_CASE("surface terms match the explicit-loop reference") {
  const Shape3 shape{12, 12, 12};
  LabelMap labels(shape);
  for (int z = 4; z < 7; ++z)
    for (int y = 4; y < 7; ++y)
      for (int x = 4; x < 7; ++x) labels.at(x, y, z) = 4;  // solid 3x3x3 block

  for (SurfaceMode mode : {SurfaceMode::GradientMagnitudeSum, SurfaceMode::NonzeroGradientCount}) {
    const bool count = mode == SurfaceMode::NonzeroGradientCount;
    const FeatureVector f = extract_features(labels, full_brain(shape), 50.0, mode);
    CHECK(f.surface_wt ==
          doctest::Approx(testsup::surface_oracle(labels, in_wt, count)).epsilon(1e-9));
    CHECK(f.surface_tc ==
          doctest::Approx(testsup::surface_oracle(labels, in_tc, count)).epsilon(1e-9));
    CHECK(f.surface_et ==
          doctest::Approx(testsup::surface_oracle(labels, in_et, count)).epsilon(1e-9));
  }
}

TEST_CASE("features match the reference on random label maps and stay nested") {
  std::mt19937_64 rng(55);
  for (int i = 0; i < 10; ++i) {
    const LabelMap labels = testsup::random_label_map({9, 8, 7}, rng);
    const BinaryMask brain = full_brain(labels.shape);
    const FeatureVector f = extract_features(labels, brain, 60.0);

    long long wt = 0, tc = 0, et = 0;
    for (auto v : labels.data) {
      wt += in_wt(v);
      tc += in_tc(v);
      et += in_et(v);
    }
    const double b = static_cast<double>(labels.shape.count());
    CHECK(f.ratio_wt == doctest::Approx(wt / b).epsilon(1e-12));
    CHECK(f.ratio_tc == doctest::Approx(tc / b).epsilon(1e-12));
    CHECK(f.ratio_et == doctest::Approx(et / b).epsilon(1e-12));

    CHECK(f.ratio_et <= f.ratio_tc);
    CHECK(f.ratio_tc <= f.ratio_wt);

    CHECK(f.surface_wt ==
          doctest::Approx(testsup::surface_oracle(labels, in_wt, false)).epsilon(1e-9));
  }
}

TEST_CASE("feature extraction refuses an empty brain") {
  CHECK_THROWS_AS(extract_features(LabelMap({4, 4, 4}), BinaryMask({4, 4, 4}), 50.0), DataError);
}

TEST_CASE("filter_gtr keeps exactly the gross-total-resection records") {
  std::vector<SurvivalRecord> recs(5);
  recs[0].resection = ResectionStatus::GTR;
  recs[1].resection = ResectionStatus::STR;
  recs[2].resection = ResectionStatus::GTR;
  recs[3].resection = ResectionStatus::NA;
  recs[4].resection = ResectionStatus::GTR;
  CHECK(filter_gtr(recs).size() == 3);
  CHECK(filter_gtr({}).empty());

  for (auto& r : recs) r.resection = ResectionStatus::GTR;
  CHECK(filter_gtr(recs).size() == 5);
}

TEST_CASE("survival groups split at 300 and 450 days") {
  CHECK(bucket(0) == OSBucket::Short);
  CHECK(bucket(299) == OSBucket::Short);
  CHECK(bucket(300) == OSBucket::Mid);
  CHECK(bucket(450) == OSBucket::Mid);
  CHECK(bucket(451) == OSBucket::Long);
  CHECK(bucket(10000) == OSBucket::Long);

  CHECK(std::string(bucket_name(OSBucket::Short)) == "short");
  CHECK(std::string(bucket_name(OSBucket::Mid)) == "mid");
  CHECK(std::string(bucket_name(OSBucket::Long)) == "long");
}

TEST_CASE("evaluate_os reproduces the hand-computed three-subject example") {
  const std::vector<double> truths = {100, 400, 500};
  const std::vector<double> preds = {200, 410, 800};
  const OSEvaluation ev = evaluate_os(preds, truths);

  CHECK(ev.accuracy == 1.0);  // short/mid/long all match
  CHECK(ev.mse == (100.0 * 100 + 10 * 10 + 300 * 300) / 3.0);
  CHECK(ev.median_se == 100.0 * 100);
  CHECK(ev.spearman_r == 1.0);

  const double mean_se = (10000.0 + 100.0 + 90000.0) / 3.0;
  const double var = ((10000 - mean_se) * (10000 - mean_se) +
                      (100 - mean_se) * (100 - mean_se) +
                      (90000 - mean_se) * (90000 - mean_se)) /
                     3.0;
  CHECK(ev.std_se == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
}

TEST_CASE("evaluate_os endpoints: perfect, reversed, mismatched") {
  const std::vector<double> t = {100, 200, 300, 600};
  const OSEvaluation perfect = evaluate_os(t, t);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.mse == 0.0);
  CHECK(perfect.median_se == 0.0);
  CHECK(perfect.spearman_r == 1.0);

  const std::vector<double> rev = {600, 300, 200, 100};
  CHECK(evaluate_os(rev, t).spearman_r == -1.0);

  CHECK_THROWS_AS(evaluate_os({1, 2}, {1, 2, 3}), DataError);
  CHECK_THROWS_AS(evaluate_os({1}, {1}), DataError);
}

TEST_CASE("median squared error averages the middle pair for even counts") {
  const std::vector<double> truths = {0, 0, 0, 0};
  const std::vector<double> preds = {1, 2, 3, 4};  // SEs 1, 4, 9, 16
  CHECK(evaluate_os(preds, truths).median_se == doctest::Approx((4.0 + 9.0) / 2.0));
}

TEST_CASE("rank correlation uses average ranks on ties and matches the reference") {
  const std::vector<double> a = {10, 20, 20, 30};
  const std::vector<double> b = {1, 2, 2, 3};
  CHECK(evaluate_os(a, b).spearman_r == doctest::Approx(1.0));

  std::mt19937_64 rng(66);
  std::uniform_int_distribution<int> coarse(0, 5);  // collisions likely
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> x(8), y(8);
    for (int i = 0; i < 8; ++i) {
      x[i] = coarse(rng);
      y[i] = coarse(rng);
    }
    const double got = evaluate_os(x, y).spearman_r;
    const double want = testsup::spearman_oracle(x, y);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("training refuses fewer records than folds") {
  OSModelConfig cfg;
  const auto few = linear_fixture(3, 1, 0.0);
  CHECK_THROWS_AS(train_os(few, cfg, 0), DataError);
}

TEST_CASE("cross-validated training is deterministic and predicts finite days") {
  OSModelConfig cfg;
  cfg.epochs = 40;  // keep the unit test quick
  const auto data = linear_fixture(25, 2, 5.0);

  const OSTrainResult a = train_os(data, cfg, 7);
  const OSTrainResult b = train_os(data, cfg, 7);
  REQUIRE(a.fold_val_mse.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(a.fold_val_mse[i] == b.fold_val_mse[i]);
  CHECK(a.mean_val_mse == b.mean_val_mse);

  for (const auto& ex : data) {
    const double days = predict_os(a.model, ex.features);
    CHECK(std::isfinite(days));
    CHECK(days >= 0.0);
    CHECK(days == predict_os(b.model, ex.features));
  }

  // zero-tumor features still yield a prediction
  FeatureVector zero;
  zero.age = 60.0;
  CHECK(std::isfinite(predict_os(a.model, zero)));
}

TEST_CASE("survival checkpoints round trip") {
  TempDir tmp;
  OSModelConfig cfg;
  cfg.epochs = 15;
  const auto data = linear_fixture(15, 3, 2.0);
  const OSModel model = train_os(data, cfg, 9).model;

  const auto path = tmp / "os_model.ckpt";
  model.save(path);
  const OSModel loaded = OSModel::load(path);
  CHECK(loaded.folds.size() == model.folds.size());
  CHECK(loaded.seed == model.seed);
  for (const auto& ex : data)
    CHECK(predict_os(loaded, ex.features) == predict_os(model, ex.features));

  CHECK_THROWS_AS(OSModel::load(tmp / "absent.ckpt"), DataError);
}

TEST_CASE("negative raw outputs clamp to zero days") {
  OSModel model;
  model.config = OSModelConfig{};
  OSFold fold;
  fold.feat_mu.fill(0.0f);
  fold.feat_sd.fill(1.0f);
  fold.target_mu = 0.0f;
  fold.target_sd = 1.0f;
  const int h = model.config.hidden_units;
  fold.w1.assign(static_cast<std::size_t>(h) * 7, 0.0f);
  fold.b1.assign(h, 0.0f);
  fold.w2.assign(static_cast<std::size_t>(h) * h, 0.0f);
  fold.b2.assign(h, 0.0f);
  fold.w3.assign(h, 0.0f);
  fold.b3 = {-5.0f};  // raw output -5 days
  model.folds = {fold};

  CHECK(predict_os(model, FeatureVector{}) == 0.0);
}

TEST_CASE("the linear fixture is learnable to 80 percent group accuracy") {
  OSModelConfig cfg;  // full 500-epoch schedule
  const auto train_set = linear_fixture(60, 11, 8.0);
  const auto test_set = linear_fixture(25, 12, 0.0);

  const OSModel model = train_os(train_set, cfg, 13).model;
  int hits = 0;
  for (const auto& ex : test_set)
    if (bucket(predict_os(model, ex.features)) == bucket(ex.days)) ++hits;
  CHECK(hits >= 20);  // 0.8 of 25
}

TEST_CASE("feature tables round trip through CSV") {
  TempDir tmp;
  std::vector<std::pair<std::string, FeatureVector>> rows;
  FeatureVector f;
  f.ratio_wt = 0.123456789012345;
  f.ratio_tc = 1e-9;
  f.ratio_et = 0.0;
  f.surface_wt = 1234.5678;
  f.surface_tc = 77.0 / 3.0;
  f.surface_et = 0.25;
  f.age = 61.3;
  rows.emplace_back("sub-01", f);
  FeatureVector g;
  g.age = 44.0;
  rows.emplace_back("sub-02", g);

  const auto path = tmp / "features.csv";
  save_features_csv(rows, path);
  const auto back = load_features_csv(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].first == "sub-01");
  const auto fa = back[0].second.as_array(), fb = rows[0].second.as_array();
  for (int i = 0; i < 7; ++i) CHECK(fa[i] == doctest::Approx(fb[i]).epsilon(1e-12));

  CHECK_THROWS_AS(load_features_csv(tmp / "none.csv"), DataError);
}
