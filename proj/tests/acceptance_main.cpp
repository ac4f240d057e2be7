// Release gate: each check below prints one [PASS]/[FAIL] line and the binary
// exits nonzero if anything failed. Tolerances are pinned here on purpose;
// loosening them is a behavior change, not a test fix.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glioseg/dice_loss.hpp"
#include "glioseg/labelfuse.hpp"
#include "glioseg/metrics.hpp"
#include "glioseg/nifti_io.hpp"
#include "glioseg/patching.hpp"
#include "glioseg/predict.hpp"
#include "glioseg/preprocess.hpp"
#include "glioseg/segmodel.hpp"
#include "glioseg/subject_io.hpp"
#include "glioseg/survival.hpp"
#include "glioseg/training.hpp"
#include "support/synthetic.hpp"

using namespace glioseg;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

void require_close(double got, double want, double tol, const std::string& what) {
  if (!(std::abs(got - want) <= tol)) {
    std::ostringstream ss;
    ss << what << ": got " << got << ", want " << want << " +/- " << tol;
    throw Failure(ss.str());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --------------------------------------------------------------------------
// 1. brain-wise normalization lands in [10, 110] with exact endpoints

void check_normalization_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);

  std::vector<Subject> subjects;
  for (int i = 0; i < 10; ++i) {
    Subject s;
    s.id = "n" + std::to_string(i);
    const Shape3 shape{56 + int(rng() % 12), 52 + int(rng() % 12), 40 + int(rng() % 10)};
    for (int m = 0; m < 4; ++m)
      s.modalities[m] =
          testsup::random_brain_volume(shape, rng, 300.0f + 150.0f * m, 90.0f + 20.0f * m);
    subjects.push_back(std::move(s));
  }

  const NormStats stats = fit_norm_stats(subjects);
  for (const Subject& raw : subjects) {
    const Subject out = preprocess_subject(raw, stats);
    for (Modality m : kModalities) {
      const Volume& before = raw.modality(m);
      const Volume& after = out.modality(m);
      double lo = 1e300, hi = -1e300;
      for (std::size_t i = 0; i < after.data.size(); ++i) {
        if (before.data[i] == 0.0f) {
          require(after.data[i] == 0.0f, "background voxel moved off zero");
          continue;
        }
        const double v = after.data[i];
        require(v >= 10.0 - 1e-6 && v <= 110.0 + 1e-6,
                "brain voxel escaped [10, 110]: " + std::to_string(v));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      require_close(lo, 10.0, 1e-6, "per-image minimum");
      require_close(hi, 110.0, 1e-6, "per-image maximum");
    }
  }
  require(seconds_since(t0) < 10.0, "normalization suite exceeded 10 s");
}

// --------------------------------------------------------------------------
// 2. both patching strategies cover every box; corner patches sit flush

// Coverage status per axis only changes at patch boundaries, so checking one
// representative per boundary interval is exact.
bool covers(const std::vector<PatchSpec>& specs, const BrainBox& box) {
  std::array<std::vector<int>, 3> probes;
  for (int a = 0; a < 3; ++a) {
    std::vector<int> pts = {box.lo[a], box.hi[a]};
    for (const PatchSpec& s : specs)
      for (int c : {s.start[a], s.start[a] + s.size - 1, s.start[a] + s.size})
        if (c > box.lo[a] && c < box.hi[a]) pts.push_back(c);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    probes[a] = std::move(pts);
  }
  for (int x : probes[0])
    for (int y : probes[1])
      for (int z : probes[2]) {
        bool hit = false;
        for (const PatchSpec& s : specs)
          if (x >= s.start[0] && x < s.start[0] + s.size && y >= s.start[1] &&
              y < s.start[1] + s.size && z >= s.start[2] && z < s.start[2] + s.size) {
            hit = true;
            break;
          }
        if (!hit) return false;
      }
  return true;
}

void check_patch_geometry() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  PatchConfig cfg;  // 128 / 32 / offsets up to 4

  for (int trial = 0; trial < 200; ++trial) {
    BrainBox box;
    for (int a = 0; a < 3; ++a) {
      const int extent = 1 + int(rng() % 240);
      box.lo[a] = int(rng() % (241 - extent));
      box.hi[a] = box.lo[a] + extent - 1;
    }

    const auto grid = patches_random_grid(box, cfg, rng);
    const auto corners = patches_corner_anchored(box, cfg);
    require(covers(grid, box), "random grid left part of the box uncovered");
    require(covers(corners, box), "corner strategy left part of the box uncovered");

    for (int a = 0; a < 3; ++a) {
      if (box.extent(a) < cfg.patch_size) continue;
      bool low_flush = false, high_flush = false;
      for (const PatchSpec& s : corners) {
        if (s.start[a] == box.lo[a]) low_flush = true;
        if (s.start[a] + s.size == box.hi[a] + 1) high_flush = true;
      }
      require(low_flush && high_flush, "corner patch not flush with the box on axis " +
                                           std::to_string(a));
    }
  }
  require(seconds_since(t0) < 5.0, "patch geometry suite exceeded 5 s");
}

// --------------------------------------------------------------------------
// 3. extracting corner patches and reconstructing reproduces the field

void check_reconstruction_roundtrip() {
  const Shape3 full{150, 130, 100};
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor4 field(3, full);
  for (auto& v : field.v) v = u(rng);

  const BrainBox box{{10, 8, 5}, {139, 119, 94}};
  PatchConfig cfg;
  cfg.patch_size = 64;
  cfg.overlap = 16;
  const auto specs = patches_corner_anchored(box, cfg);

  std::vector<Tensor4> patches;
  for (const PatchSpec& s : specs) {
    Tensor4 p(3, {s.size, s.size, s.size});
    for (int c = 0; c < 3; ++c)
      for (int z = 0; z < s.size; ++z)
        for (int y = 0; y < s.size; ++y)
          for (int x = 0; x < s.size; ++x) {
            const int gx = x + s.start[0], gy = y + s.start[1], gz = z + s.start[2];
            if (gx >= 0 && gy >= 0 && gz >= 0 && gx < full.nx && gy < full.ny && gz < full.nz)
              p.at(c, x, y, z) = field.at(c, gx, gy, gz);
          }
    patches.push_back(std::move(p));
  }

  const ProbabilityMaps rec = reconstruct(patches, specs, full);
  for (int c = 0; c < 3; ++c)
    for (int z = 0; z < full.nz; ++z)
      for (int y = 0; y < full.ny; ++y)
        for (int x = 0; x < full.nx; ++x) {
          bool covered = false;
          for (const PatchSpec& s : specs)
            if (x >= s.start[0] && x < s.start[0] + s.size && y >= s.start[1] &&
                y < s.start[1] + s.size && z >= s.start[2] && z < s.start[2] + s.size) {
              covered = true;
              break;
            }
          const float got = rec.at(c, x, y, z);
          if (covered)
            require(std::abs(got - field.at(c, x, y, z)) <= 1e-6f,
                    "reconstructed voxel drifted beyond 1e-6");
          else
            require(got == 0.0f, "uncovered voxel is nonzero");
        }
}

// --------------------------------------------------------------------------
// 4. loss range, perfect-prediction value, gradient vs finite differences

void check_loss() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  std::bernoulli_distribution coin(0.35);

  for (int trial = 0; trial < 1000; ++trial) {
    Tensor4 y(3, {5, 4, 3}), p(3, {5, 4, 3});
    for (auto& v : y.v) v = coin(rng) ? 1.0f : 0.0f;
    for (auto& v : p.v) v = u(rng);
    const double l = dice_loss(y, p);
    require(l <= 0.0 && l >= -1.5, "loss left [-1.5, 0]: " + std::to_string(l));
  }

  for (int trial = 0; trial < 200; ++trial) {
    Tensor4 y(3, {4, 4, 4});
    for (auto& v : y.v) v = coin(rng) ? 1.0f : 0.0f;
    for (int c = 0; c < 3; ++c) y.v[c * y.plane()] = 1.0f;  // nonempty channels
    require_close(dice_loss(y, y), -1.5, 1e-4, "perfect-prediction loss");
  }

  for (int trial = 0; trial < 5; ++trial) {
    Tensor4 y(3, {4, 4, 4}), p(3, {4, 4, 4});
    for (auto& v : y.v) v = coin(rng) ? 1.0f : 0.0f;
    std::uniform_real_distribution<float> mid(0.05f, 0.95f);
    for (auto& v : p.v) v = mid(rng);

    const Tensor4 g = dice_loss_grad(y, p);
    for (std::size_t i = 0; i < p.v.size(); ++i) {
      const float keep = p.v[i];
      const float h = 5e-4f;
      p.v[i] = keep + h;
      const double up = dice_loss(y, p);
      const double x_up = p.v[i];
      p.v[i] = keep - h;
      const double down = dice_loss(y, p);
      const double x_down = p.v[i];
      p.v[i] = keep;

      const double fd = (up - down) / (x_up - x_down);
      require(std::abs(g.v[i] - fd) <= 1e-3 * std::max(std::abs(fd), 1e-6),
              "analytic gradient disagrees with finite differences");
    }
  }
}

// --------------------------------------------------------------------------
// 5. metric values equal brute-force confusion counts and all-pairs distances

void check_metrics_oracle() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> density(0.0, 0.55);
  std::uniform_real_distribution<double> usp(0.5, 2.5);

  for (int trial = 0; trial < 100; ++trial) {
    const Shape3 shape{1 + int(rng() % 8), 1 + int(rng() % 8), 1 + int(rng() % 8)};
    BinaryMask pred = testsup::random_mask(shape, density(rng), rng);
    BinaryMask gt = testsup::random_mask(shape, density(rng), rng);
    if (trial % 11 == 0) pred = BinaryMask(shape);  // keep degenerates in play
    if (trial % 17 == 0) gt = BinaryMask(shape);
    const Spacing3 sp =
        trial % 3 ? Spacing3{1, 1, 1} : Spacing3{usp(rng), usp(rng), usp(rng)};

    const auto c = testsup::confusion(pred, gt);
    require(dice(pred, gt) == testsup::dice_oracle(c), "dice differs from confusion counts");
    require(sensitivity(pred, gt) == testsup::sensitivity_oracle(c),
            "sensitivity differs from confusion counts");
    require(specificity(pred, gt) == testsup::specificity_oracle(c),
            "specificity differs from confusion counts");

    const double got = hausdorff95(pred, gt, sp);
    const double want = testsup::hd95_oracle(pred, gt, sp);
    if (std::isinf(want))
      require(std::isinf(got), "expected an infinite surface distance");
    else
      require(std::abs(got - want) <= 1e-9 * std::max(1.0, want),
              "hausdorff95 differs from the all-pairs oracle");
  }

  // conventions, stated directly
  const Shape3 s{4, 4, 4};
  BinaryMask empty(s), one(s);
  one.at(1, 1, 1) = 1;
  require(dice(empty, empty) == 1.0, "both-empty dice should be 1");
  require(hausdorff95(empty, empty, {1, 1, 1}) == 0.0, "both-empty hausdorff should be 0");
  require(std::isinf(hausdorff95(one, empty, {1, 1, 1})), "one-empty hausdorff should be inf");
  require(std::isinf(hausdorff95(empty, one, {1, 1, 1})), "one-empty hausdorff should be inf");
}

// --------------------------------------------------------------------------
// 6. fusion inverts the channel expansion and honors region priority

void check_fusion() {
  LabelMap labels({4, 1, 1});
  labels.at(0, 0, 0) = 0;
  labels.at(1, 0, 0) = 1;
  labels.at(2, 0, 0) = 2;
  labels.at(3, 0, 0) = 4;
  const LabelMap back = fuse(labels_to_channels(labels), FusionConfig{});
  for (std::size_t i = 0; i < labels.data.size(); ++i)
    require(back.data[i] == labels.data[i], "fuse(labels_to_channels) is not the identity");

  std::mt19937_64 rng(606);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  const float t = 0.5f;
  for (int trial = 0; trial < 1000; ++trial) {
    ProbabilityMaps p(3, {1, 1, 1});
    const float wt = u(rng), tc = u(rng), et = u(rng);
    p.at(0, 0, 0, 0) = wt;
    p.at(1, 0, 0, 0) = tc;
    p.at(2, 0, 0, 0) = et;
    const std::uint8_t lab = fuse(p, FusionConfig{}).at(0, 0, 0);
    if (et >= t)
      require(lab == 4, "enhancing probability above threshold must label 4");
    else if (tc >= t)
      require(lab == 1, "core probability above threshold must label 1");
    else if (wt >= t)
      require(lab == 2, "whole-tumor probability above threshold must label 2");
    else
      require(lab == 0, "sub-threshold probabilities must stay background");
  }
}

// --------------------------------------------------------------------------
// 7. 150 optimization steps on two synthetic subjects reach WT dice 0.7

void check_smoke_training() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(707);

  std::vector<Subject> raw;
  for (int i = 0; i < 2; ++i) {
    testsup::SphereSpec spec;
    spec.center = {23.0 + i, 24.0, 24.0};
    spec.r_brain = 14;
    spec.r_wt = 9;
    spec.r_tc = 6;
    spec.r_et = 3;
    raw.push_back(testsup::sphere_subject("smoke" + std::to_string(i), {48, 48, 48}, spec, rng));
  }
  const NormStats stats = fit_norm_stats(raw);
  std::vector<Subject> subjects;
  for (const auto& s : raw) subjects.push_back(preprocess_subject(s, stats));

  SegModelConfig mcfg;
  mcfg.patch_size = 32;
  mcfg.depth = 3;
  mcfg.base_filters = 8;
  SegModel model(mcfg, 7);

  PatchConfig pcfg;
  pcfg.patch_size = 32;
  pcfg.overlap = 8;

  TrainConfig tcfg;
  tcfg.lr = 1e-2;
  tcfg.epochs = 75;  // 4 steps per epoch; max_steps cuts the run at exactly 150
  tcfg.max_steps = 150;
  tcfg.augment_enabled = false;
  tcfg.seed = 11;

  testsup::TempDir tmp;
  const TrainResult result = train_phase(model, InMemorySubjects(subjects),
                                         PatchStrategy::Corners, pcfg, tcfg, tmp / "smoke",
                                         "phase1");
  long steps = 0;
  for (const auto& e : result.history) steps += e.steps;
  require(steps == 150, "expected exactly 150 optimization steps");

  SegModel best = SegModel::load(result.best_checkpoint);
  double dice_sum = 0.0;
  for (const Subject& s : subjects) {
    const ProbabilityMaps maps = predict_probability_maps(best, s, pcfg);
    const LabelMap pred = fuse(maps, FusionConfig{});
    const auto pred_masks = region_masks(pred);
    const auto gt_masks = region_masks(*s.label);
    dice_sum += dice(pred_masks[0], gt_masks[0]);
  }
  const double wt_dice = dice_sum / 2.0;
  const double elapsed = seconds_since(t0);
  std::printf("       (smoke training: WT dice %.4f after 150 steps, %.1f s)\n", wt_dice,
              elapsed);
  require(wt_dice >= 0.7, "training WT dice below 0.7: " + std::to_string(wt_dice));
  require(elapsed < 600.0, "smoke training exceeded 10 minutes");
}

// --------------------------------------------------------------------------
// 8. survival features, groups, fixture accuracy, hand-checked evaluation

bool in_wt(std::uint8_t v) { return v == 1 || v == 2 || v == 4; }
bool in_tc(std::uint8_t v) { return v == 1 || v == 4; }
bool in_et(std::uint8_t v) { return v == 4; }

double fixture_days(const FeatureVector& f, double noise) {
  const double d = 1500.0 * f.ratio_wt + 900.0 * f.ratio_tc - 400.0 * f.ratio_et +
                   0.4 * f.surface_wt + 6.0 * (80.0 - f.age) + 60.0 + noise;
  return std::max(5.0, std::min(950.0, d));
}

std::vector<OSTrainExample> fixture(int n, std::uint64_t seed, double noise_scale) {
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
    out.push_back({"f" + std::to_string(i), f, fixture_days(f, gauss(rng))});
  }
  return out;
}

void check_survival() {
  std::mt19937_64 rng(808);

  // feature oracle on random label maps
  for (int trial = 0; trial < 20; ++trial) {
    const Shape3 shape{4 + int(rng() % 9), 4 + int(rng() % 8), 4 + int(rng() % 7)};
    const LabelMap labels = testsup::random_label_map(shape, rng);
    BinaryMask brain = testsup::random_mask(shape, 0.8, rng);
    brain.data[0] = 1;  // never empty
    const double age = 30.0 + double(rng() % 50);
    const FeatureVector f = extract_features(labels, brain, age);

    long long wt = 0, tc = 0, et = 0;
    for (auto v : labels.data) {
      wt += in_wt(v);
      tc += in_tc(v);
      et += in_et(v);
    }
    const double b = static_cast<double>(brain.count());
    require(f.ratio_wt == wt / b && f.ratio_tc == tc / b && f.ratio_et == et / b,
            "volume ratios differ from explicit counts");
    require(f.age == age, "age must be copied through");

    const double o_wt = testsup::surface_oracle(labels, in_wt, false);
    const double o_tc = testsup::surface_oracle(labels, in_tc, false);
    const double o_et = testsup::surface_oracle(labels, in_et, false);
    require(std::abs(f.surface_wt - o_wt) <= 1e-9 * std::max(1.0, o_wt),
            "whole-tumor surface differs from the explicit-loop oracle");
    require(std::abs(f.surface_tc - o_tc) <= 1e-9 * std::max(1.0, o_tc),
            "core surface differs from the explicit-loop oracle");
    require(std::abs(f.surface_et - o_et) <= 1e-9 * std::max(1.0, o_et),
            "enhancing surface differs from the explicit-loop oracle");

    require(f.ratio_et <= f.ratio_tc && f.ratio_tc <= f.ratio_wt,
            "region nesting must order the ratios");
  }

  // group boundaries
  require(bucket(299) == OSBucket::Short, "299 days is short survival");
  require(bucket(300) == OSBucket::Mid, "300 days is mid survival");
  require(bucket(450) == OSBucket::Mid, "450 days is mid survival");
  require(bucket(451) == OSBucket::Long, "451 days is long survival");
  require(bucket(0) == OSBucket::Short, "0 days is short survival");

  // learnable synthetic fixture, held-out accuracy
  OSModelConfig cfg;
  const auto train_set = fixture(60, 11, 8.0);
  const auto test_set = fixture(25, 12, 0.0);
  const OSModel model = train_os(train_set, cfg, 13).model;
  int hits = 0;
  for (const auto& ex : test_set)
    if (bucket(predict_os(model, ex.features)) == bucket(ex.days)) ++hits;
  const double accuracy = hits / 25.0;
  std::printf("       (survival fixture: held-out bucket accuracy %.2f)\n", accuracy);
  require(accuracy >= 0.8, "held-out bucket accuracy below 0.8");

  // hand-computed three-subject example, exact
  const OSEvaluation ev = evaluate_os({200, 410, 800}, {100, 400, 500});
  require(ev.accuracy == 1.0, "example accuracy must be exactly 1");
  require(ev.mse == (100.0 * 100 + 10 * 10 + 300 * 300) / 3.0, "example MSE must match");
  require(ev.median_se == 10000.0, "example median squared error must match");
  require(ev.spearman_r == 1.0, "example rank correlation must be exactly 1");
}

// --------------------------------------------------------------------------
// 9. the shipped binary preprocesses, predicts and evaluates a full-size
//    subject end to end

int run_cli(const std::string& cli, const std::string& args,
            const std::filesystem::path& log) {
  const std::string cmd = "\"" + cli + "\" " + args + " >> \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

void check_cli_end_to_end() {
  const char* cli = std::getenv("GLIOSEG_CLI");
  require(cli != nullptr, "GLIOSEG_CLI must point at the pipeline binary");

  testsup::TempDir tmp;
  const auto data = tmp / "data";
  const auto out = tmp / "out";
  const auto log = tmp / "cli.log";

  // one full-size subject; the brain stays smaller than one patch so
  // prediction runs a single forward pass
  std::mt19937_64 rng(909);
  testsup::SphereSpec spec;
  spec.center = {120, 120, 77};
  spec.r_brain = 30;
  spec.r_wt = 20;
  spec.r_tc = 12;
  spec.r_et = 6;
  const Subject subject = testsup::sphere_subject("sub-e2e", {240, 240, 155}, spec, rng);
  const auto dir = data / "sub-e2e";
  std::filesystem::create_directories(dir);
  for (Modality m : kModalities)
    save_volume(subject.modality(m),
                dir / (std::string("sub-e2e_") + modality_suffix(m) + ".nii.gz"));
  save_label_map(*subject.label, subject.modalities[0], dir / "sub-e2e_seg.nii.gz");

  nlohmann::json cfg = {
      {"data_root", data.string()},
      {"output_root", out.string()},
      {"patch", {{"patch_size", 64}, {"overlap", 16}}},
      {"model", {{"patch_size", 64}, {"depth", 3}, {"base_filters", 4}}},
      {"train", {{"epochs", 0}, {"augment", {{"enabled", false}}}}},
  };
  const auto cfg_path = tmp / "config.json";
  {
    std::ofstream f(cfg_path);
    f << cfg.dump(2);
  }
  const std::string base = "--config \"" + cfg_path.string() + "\"";

  require(run_cli(cli, "fit-stats " + base, log) == 0, "fit-stats exited nonzero");
  require(run_cli(cli, "preprocess " + base, log) == 0, "preprocess exited nonzero");
  // zero epochs: the deliverable checkpoint holds the untrained initialization
  require(run_cli(cli, "train-seg " + base, log) == 0, "train-seg exited nonzero");
  require(run_cli(cli, "predict-seg " + base, log) == 0, "predict-seg exited nonzero");

  const LabelMap pred = load_label_map(out / "predictions" / "sub-e2e.nii.gz");
  require(pred.shape == Shape3{240, 240, 155}, "prediction is not 240x240x155");
  for (auto v : pred.data)
    require(v == 0 || v == 1 || v == 2 || v == 4, "prediction carries an illegal label value");

  require(run_cli(cli, "eval-seg " + base, log) == 0, "eval-seg exited nonzero");
  require(std::filesystem::exists(out / "reports" / "seg_report.csv"),
          "eval-seg left no report");
}

struct Criterion {
  const char* name;
  std::function<void()> fn;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"normalization bounds and exact endpoints", check_normalization_suite},
      {"patch geometry coverage and corner flushness", check_patch_geometry},
      {"reconstruction round trip", check_reconstruction_roundtrip},
      {"loss range, optimum and gradient", check_loss},
      {"metrics against brute-force oracles", check_metrics_oracle},
      {"fusion identity and priority", check_fusion},
      {"smoke training to WT dice 0.7", check_smoke_training},
      {"survival features, groups and evaluation", check_survival},
      {"command-line pipeline end to end", check_cli_end_to_end},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.fn();
      std::printf("[PASS] %s (%.1f s)\n", c.name, seconds_since(t0));
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] %s: %s\n", c.name, e.what());
    }
    std::fflush(stdout);
  }

  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
