#include "glioseg/training.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "glioseg/labelfuse.hpp"

namespace glioseg {

void Adam::init(const std::vector<ParamView>& params) {
  t_ = 0;
  m_.assign(params.size(), {});
  v_.assign(params.size(), {});
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i].assign(params[i].value->size(), 0.0f);
    v_[i].assign(params[i].value->size(), 0.0f);
  }
}

void Adam::step(const std::vector<ParamView>& params) {
  if (m_.size() != params.size()) throw ConfigError("Adam::step before init");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  const double rate = lr * std::sqrt(bc2) / bc1;
  for (std::size_t i = 0; i < params.size(); ++i) {
    float* p = params[i].value->data();
    const float* g = params[i].grad->data();
    float* m = m_[i].data();
    float* v = v_[i].data();
    const std::size_t n = params[i].value->size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = static_cast<float>(beta1 * m[j] + (1.0 - beta1) * g[j]);
      v[j] = static_cast<float>(beta2 * v[j] + (1.0 - beta2) * static_cast<double>(g[j]) * g[j]);
      p[j] -= static_cast<float>(rate * m[j] / (std::sqrt(static_cast<double>(v[j])) + eps));
    }
  }
}

double PlateauScheduler::observe(double loss, double lr) {
  if (loss < best_ - min_delta) {
    best_ = loss;
    bad_epochs_ = 0;
    return lr;
  }
  if (++bad_epochs_ >= patience) {
    bad_epochs_ = 0;
    return lr * factor;
  }
  return lr;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("training: learning rate must be positive");
  if (!(lr_decay > 0.0) || lr_decay >= 1.0)
    throw ConfigError("training: lr_decay must be in (0, 1)");
  if (plateau_patience < 1) throw ConfigError("training: plateau_patience must be at least 1");
  if (plateau_min_delta < 0.0) throw ConfigError("training: plateau_min_delta must be non-negative");
  if (epochs < 0) throw ConfigError("training: epochs must be non-negative");
  if (batch_size != 1) throw ConfigError("training: only batch size 1 is supported");
  if (max_steps < 0) throw ConfigError("training: max_steps must be non-negative");
}

namespace {

std::vector<PatchSpec> specs_for(PatchStrategy strategy, const BrainBox& box,
                                 const PatchConfig& pcfg, std::mt19937_64& rng) {
  if (strategy == PatchStrategy::RandomGrid) return patches_random_grid(box, pcfg, rng);
  return patches_corner_anchored(box, pcfg);
}

void append_history(const std::filesystem::path& path, const EpochRecord& r) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot write training history: " + path.string());
  nlohmann::json line = {
      {"epoch", r.epoch}, {"mean_loss", r.mean_loss}, {"lr", r.lr}, {"steps", r.steps}};
  out << line.dump() << '\n';
}

}  // namespace

TrainResult train_phase(SegModel& model, const SubjectSource& subjects, PatchStrategy strategy,
                        const PatchConfig& pcfg, const TrainConfig& tcfg,
                        const std::filesystem::path& out_dir, const std::string& phase_name) {
  pcfg.validate();
  tcfg.validate();
  if (subjects.size() == 0) throw DataError("training: empty subject list");
  if (model.config().patch_size != pcfg.patch_size)
    throw ConfigError("training: model patch_size does not match patch config");

  std::filesystem::create_directories(out_dir);
  TrainResult result;
  result.best_checkpoint = out_dir / (phase_name + "_best.ckpt");
  result.last_checkpoint = out_dir / (phase_name + "_last.ckpt");
  const std::filesystem::path history_path = out_dir / (phase_name + "_history.jsonl");
  std::filesystem::remove(history_path);

  // A zero-epoch run must still leave a loadable model behind.
  model.save(result.best_checkpoint);
  model.save(result.last_checkpoint);

  auto params = model.parameters();
  Adam adam;
  adam.lr = tcfg.lr;
  adam.init(params);
  PlateauScheduler sched;
  sched.factor = tcfg.lr_decay;
  sched.patience = tcfg.plateau_patience;
  sched.min_delta = tcfg.plateau_min_delta;

  std::mt19937_64 rng(tcfg.seed);
  long total_steps = 0;
  bool stop = false;

  for (int epoch = 1; epoch <= tcfg.epochs && !stop; ++epoch) {
    double loss_sum = 0.0;
    long epoch_steps = 0;

    for (std::size_t si = 0; si < subjects.size() && !stop; ++si) {
      const Subject subject = subjects.get(si);
      if (!subject.label)
        throw DataError("training: subject " + subject.id + " has no label map");
      const BrainBox box = bounding_box(union_brain_mask(subject));

      for (const PatchSpec& spec : specs_for(strategy, box, pcfg, rng)) {
        Tensor4 patch = extract_patch(subject, spec);
        LabelMap label_patch = extract_label_patch(*subject.label, spec);
        Tensor4 target = labels_to_channels(label_patch);

        if (tcfg.augment_enabled) augment_pair(patch, target, tcfg.augment, rng);

        Tensor4 pred = model.forward(patch, true);
        Tensor4 grad;
        const double loss = dice_loss_and_grad(target, pred, grad, tcfg.loss);
        model.zero_grad();
        model.backward(grad);
        adam.step(params);

        loss_sum += loss;
        ++epoch_steps;
        ++total_steps;
        if (tcfg.max_steps > 0 && total_steps >= tcfg.max_steps) {
          stop = true;
          break;
        }
      }
    }

    if (epoch_steps == 0) break;  // max_steps exhausted before any work

    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / static_cast<double>(epoch_steps);
    rec.lr = adam.lr;
    rec.steps = epoch_steps;
    result.history.push_back(rec);
    append_history(history_path, rec);

    if (rec.mean_loss < result.best_loss) {
      result.best_loss = rec.mean_loss;
      model.save(result.best_checkpoint);
    }
    adam.lr = sched.observe(rec.mean_loss, adam.lr);
  }

  model.save(result.last_checkpoint);
  return result;
}

}  // namespace glioseg
