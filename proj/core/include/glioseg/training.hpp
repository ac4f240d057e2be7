#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "glioseg/augment.hpp"
#include "glioseg/dice_loss.hpp"
#include "glioseg/patching.hpp"
#include "glioseg/segmodel.hpp"
#include "glioseg/volume.hpp"

namespace glioseg {

// Adam with the usual bias-corrected moment estimates. `lr` is mutable so the
// plateau scheduler can drop it between epochs.
struct Adam {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void init(const std::vector<ParamView>& params);
  void step(const std::vector<ParamView>& params);

 private:
  long t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

// Halves the learning rate after `patience` epochs without the observed loss
// improving by at least `min_delta`; the no-improvement counter resets on
// each drop.
struct PlateauScheduler {
  double factor = 0.5;
  int patience = 10;
  double min_delta = 1e-4;

  double observe(double loss, double lr);

 private:
  double best_ = std::numeric_limits<double>::infinity();
  int bad_epochs_ = 0;
};

struct TrainConfig {
  double lr = 5e-4;
  double lr_decay = 0.5;
  int plateau_patience = 10;
  double plateau_min_delta = 1e-4;
  int epochs = 100;
  int batch_size = 1;  // one patch per optimizer step
  bool augment_enabled = true;
  AugmentOptions augment;
  DiceLossConfig loss;
  std::uint64_t seed = 0;
  long max_steps = 0;  // 0 = no cap; otherwise stop after this many optimizer steps

  void validate() const;
};

enum class PatchStrategy { RandomGrid, Corners };

struct EpochRecord {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double lr = 0.0;
  long steps = 0;
};

// Subjects may be held in memory or loaded on demand; the trainer walks them
// by index every epoch.
class SubjectSource {
 public:
  virtual ~SubjectSource() = default;
  virtual std::size_t size() const = 0;
  virtual Subject get(std::size_t i) const = 0;
};

class InMemorySubjects : public SubjectSource {
 public:
  explicit InMemorySubjects(std::vector<Subject> subjects) : subjects_(std::move(subjects)) {}
  std::size_t size() const override { return subjects_.size(); }
  Subject get(std::size_t i) const override { return subjects_.at(i); }

 private:
  std::vector<Subject> subjects_;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  double best_loss = std::numeric_limits<double>::infinity();
};

// One training phase over labeled, normalized subjects. Writes
// <phase>_best.ckpt (lowest mean epoch loss; present even before the first
// epoch completes so a zero-epoch run still yields a loadable model),
// <phase>_last.ckpt, and <phase>_history.jsonl under out_dir. Single-threaded
// and deterministic for a fixed config and seed.
TrainResult train_phase(SegModel& model, const SubjectSource& subjects, PatchStrategy strategy,
                        const PatchConfig& pcfg, const TrainConfig& tcfg,
                        const std::filesystem::path& out_dir, const std::string& phase_name);

}  // namespace glioseg
