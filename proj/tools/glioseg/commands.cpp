#include "commands.hpp"

#include <atomic>
#include <exception>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "glioseg/metrics.hpp"
#include "glioseg/nifti_io.hpp"
#include "glioseg/predict.hpp"
#include "glioseg/preprocess.hpp"
#include "glioseg/report.hpp"
#include "glioseg/subject_io.hpp"

namespace glioseg::cli {

namespace {

// Subject-level parallelism; exceptions from workers surface after join.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::scoped_lock lock(mu);
        if (first_error) return;
      }
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  pool.reserve(count);
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Loads each subject from disk on demand so a training corpus never has to
// fit in memory.
class DirectorySubjects : public SubjectSource {
 public:
  DirectorySubjects(std::filesystem::path root, std::vector<std::string> ids)
      : root_(std::move(root)), ids_(std::move(ids)) {}

  std::size_t size() const override { return ids_.size(); }
  Subject get(std::size_t i) const override { return load_subject(root_, ids_.at(i)); }

 private:
  std::filesystem::path root_;
  std::vector<std::string> ids_;
};

std::filesystem::path find_file(const std::filesystem::path& stem_path) {
  const std::filesystem::path gz = stem_path.string() + ".nii.gz";
  if (std::filesystem::exists(gz)) return gz;
  const std::filesystem::path plain = stem_path.string() + ".nii";
  if (std::filesystem::exists(plain)) return plain;
  return {};
}

std::filesystem::path seg_path(const std::filesystem::path& root, const std::string& id) {
  return find_file(root / id / (id + "_seg"));
}

std::filesystem::path prediction_path(const std::filesystem::path& root, const std::string& id) {
  return find_file(root / id);
}

std::vector<std::string> require_subjects(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root))
    throw DataError("subject directory does not exist: " + root.string());
  auto ids = list_subject_ids(root);
  if (ids.empty()) throw DataError("no subjects found under " + root.string());
  return ids;
}

std::map<std::string, SurvivalRecord> survival_by_id(const PipelineConfig& cfg) {
  std::map<std::string, SurvivalRecord> out;
  for (auto& r : load_survival_table(cfg.survival_csv())) out.emplace(r.id, std::move(r));
  return out;
}

}  // namespace

void cmd_fit_stats(const PipelineConfig& cfg) {
  const auto ids = require_subjects(cfg.data_root());
  NormAccumulator acc;
  for (const auto& id : ids) acc.add(load_subject(cfg.data_root(), id));
  const NormStats stats = acc.finish();

  std::filesystem::create_directories(cfg.stats_path().parent_path());
  save_norm_stats(stats, cfg.stats_path());
  std::cout << "fit-stats: " << ids.size() << " subjects -> " << cfg.stats_path().string()
            << "\n";
  write_manifest(cfg, "fit-stats", {{"subjects", ids.size()}});
}

void cmd_preprocess(const PipelineConfig& cfg) {
  const NormStats stats = load_norm_stats(cfg.stats_path());
  const auto ids = require_subjects(cfg.data_root());
  const std::filesystem::path out_root = cfg.preprocessed_root();

  parallel_for(ids.size(), cfg.jobs(), [&](std::size_t i) {
    const std::string& id = ids[i];
    const Subject processed = preprocess_subject(load_subject(cfg.data_root(), id), stats);
    const std::filesystem::path dir = out_root / id;
    std::filesystem::create_directories(dir);
    for (Modality m : kModalities)
      save_volume(processed.modality(m),
                  dir / (id + "_" + modality_suffix(m) + ".nii.gz"));
    if (processed.label)
      save_label_map(*processed.label, processed.modalities[0], dir / (id + "_seg.nii.gz"));
  });

  std::cout << "preprocess: " << ids.size() << " subjects -> " << out_root.string() << "\n";
  write_manifest(cfg, "preprocess", {{"subjects", ids.size()}});
}

void cmd_train_seg(const PipelineConfig& cfg) {
  const auto ids = require_subjects(cfg.preprocessed_root());
  const DirectorySubjects source(cfg.preprocessed_root(), ids);
  const PatchConfig pcfg = cfg.patch();
  TrainConfig tcfg = cfg.train();
  const std::filesystem::path ckpt_dir = cfg.output_root() / "checkpoints";

  SegModel model = cfg.train_init_checkpoint().empty()
                       ? SegModel(cfg.model(), cfg.seed())
                       : SegModel::load(cfg.train_init_checkpoint());

  const TrainResult phase1 =
      train_phase(model, source, PatchStrategy::RandomGrid, pcfg, tcfg, ckpt_dir, "phase1");

  // Second phase continues from the first phase's best state, at the full
  // initial learning rate again.
  model = SegModel::load(phase1.best_checkpoint);
  tcfg.seed = cfg.seed() + 1;
  const TrainResult phase2 =
      train_phase(model, source, PatchStrategy::Corners, pcfg, tcfg, ckpt_dir, "phase2");

  std::filesystem::copy_file(phase2.best_checkpoint, cfg.checkpoint(),
                             std::filesystem::copy_options::overwrite_existing);

  std::cout << "train-seg: " << ids.size() << " subjects, phase1 epochs "
            << phase1.history.size() << ", phase2 epochs " << phase2.history.size() << " -> "
            << cfg.checkpoint().string() << "\n";
  nlohmann::json result = {{"subjects", ids.size()},
                           {"phase1_epochs", phase1.history.size()},
                           {"phase2_epochs", phase2.history.size()}};
  if (!phase1.history.empty()) result["phase1_best_loss"] = phase1.best_loss;
  if (!phase2.history.empty()) result["phase2_best_loss"] = phase2.best_loss;
  write_manifest(cfg, "train-seg", result);
}

void cmd_predict_seg(const PipelineConfig& cfg) {
  const auto ids = require_subjects(cfg.preprocessed_root());
  const SegModel shared = SegModel::load(cfg.checkpoint());
  const PatchConfig pcfg = cfg.patch();
  const FusionConfig fusion_cfg = cfg.fusion();
  const std::filesystem::path out_root = cfg.predictions_root();
  std::filesystem::create_directories(out_root);

  parallel_for(ids.size(), cfg.jobs(), [&](std::size_t i) {
    // Forward passes cache activations inside the model, so each task runs
    // on its own copy.
    SegModel model = shared;
    const Subject subject = load_subject(cfg.preprocessed_root(), ids[i]);
    const ProbabilityMaps probs = predict_probability_maps(model, subject, pcfg);
    const LabelMap labels = fuse(probs, fusion_cfg);
    save_label_map(labels, subject.modalities[0], out_root / (ids[i] + ".nii.gz"));
  });

  std::cout << "predict-seg: " << ids.size() << " subjects -> " << out_root.string() << "\n";
  write_manifest(cfg, "predict-seg", {{"subjects", ids.size()}});
}

void cmd_eval_seg(const PipelineConfig& cfg) {
  const auto all_ids = require_subjects(cfg.preprocessed_root());
  std::vector<std::string> ids;
  for (const auto& id : all_ids) {
    if (seg_path(cfg.preprocessed_root(), id).empty()) continue;
    if (prediction_path(cfg.predictions_root(), id).empty())
      throw DataError("missing prediction for subject " + id);
    ids.push_back(id);
  }
  if (ids.empty()) throw DataError("no subjects with ground truth to evaluate");

  std::vector<SubjectScores> rows(ids.size());
  parallel_for(ids.size(), cfg.jobs(), [&](std::size_t i) {
    const LabelMap pred = load_label_map(prediction_path(cfg.predictions_root(), ids[i]));
    const LabelMap gt = load_label_map(seg_path(cfg.preprocessed_root(), ids[i]));
    rows[i] = {ids[i], evaluate_subject(pred, gt, gt.spacing)};
  });

  const std::filesystem::path report = cfg.output_root() / "reports" / "seg_report.csv";
  std::filesystem::create_directories(report.parent_path());
  save_seg_report(rows, report);
  std::cout << "eval-seg: " << ids.size() << " subjects -> " << report.string() << "\n";
  write_manifest(cfg, "eval-seg", {{"subjects", ids.size()}});
}

void cmd_extract_features(const PipelineConfig& cfg) {
  const auto records = filter_gtr(load_survival_table(cfg.survival_csv()));
  if (records.empty()) throw DataError("survival table has no GTR records");
  const SurfaceMode mode = cfg.surface_mode();

  std::vector<std::pair<std::string, FeatureVector>> rows(records.size());
  parallel_for(records.size(), cfg.jobs(), [&](std::size_t i) {
    const SurvivalRecord& rec = records[i];
    const auto labels_file = prediction_path(cfg.predictions_root(), rec.id);
    if (labels_file.empty())
      throw DataError("missing prediction for survival subject " + rec.id);
    const Subject subject = load_subject(cfg.preprocessed_root(), rec.id);
    const LabelMap labels = load_label_map(labels_file);
    rows[i] = {rec.id, extract_features(labels, union_brain_mask(subject), rec.age, mode)};
  });

  const std::filesystem::path out = cfg.output_root() / "features" / "features.csv";
  std::filesystem::create_directories(out.parent_path());
  save_features_csv(rows, out);
  std::cout << "extract-features: " << rows.size() << " subjects -> " << out.string() << "\n";
  write_manifest(cfg, "extract-features", {{"subjects", rows.size()}});
}

void cmd_train_os(const PipelineConfig& cfg) {
  const auto feats = load_features_csv(cfg.output_root() / "features" / "features.csv");
  const auto table = survival_by_id(cfg);

  std::vector<OSTrainExample> examples;
  for (const auto& [id, f] : feats) {
    const auto it = table.find(id);
    if (it == table.end() || !it->second.survival_days) continue;
    examples.push_back({id, f, *it->second.survival_days});
  }
  const OSModelConfig os_cfg = cfg.survival_model();
  if (examples.size() < static_cast<std::size_t>(os_cfg.folds))
    throw DataError("survival: fewer training records than folds");

  const OSTrainResult trained = train_os(examples, os_cfg, cfg.seed());
  std::filesystem::create_directories(cfg.os_checkpoint().parent_path());
  trained.model.save(cfg.os_checkpoint());

  std::cout << "train-os: " << examples.size() << " records, mean fold validation MSE "
            << trained.mean_val_mse << " -> " << cfg.os_checkpoint().string() << "\n";
  write_manifest(cfg, "train-os",
                 {{"records", examples.size()}, {"mean_val_mse", trained.mean_val_mse}});
}

void cmd_predict_os(const PipelineConfig& cfg) {
  const OSModel model = OSModel::load(cfg.os_checkpoint());
  const auto feats = load_features_csv(cfg.output_root() / "features" / "features.csv");
  if (feats.empty()) throw DataError("feature table is empty");

  std::vector<std::pair<std::string, double>> rows;
  rows.reserve(feats.size());
  for (const auto& [id, f] : feats) rows.emplace_back(id, model.predict(f));

  const std::filesystem::path out = cfg.output_root() / "predictions" / "os_predictions.csv";
  std::filesystem::create_directories(out.parent_path());
  save_os_predictions(rows, out);
  std::cout << "predict-os: " << rows.size() << " subjects -> " << out.string() << "\n";
  write_manifest(cfg, "predict-os", {{"subjects", rows.size()}});
}

void cmd_eval_os(const PipelineConfig& cfg) {
  const auto preds =
      load_os_predictions(cfg.output_root() / "predictions" / "os_predictions.csv");
  const auto table = survival_by_id(cfg);

  std::vector<double> predicted, truth;
  for (const auto& [id, days] : preds) {
    const auto it = table.find(id);
    if (it == table.end() || !it->second.survival_days) continue;
    predicted.push_back(days);
    truth.push_back(*it->second.survival_days);
  }
  const OSEvaluation ev = evaluate_os(predicted, truth);

  const std::filesystem::path report = cfg.output_root() / "reports" / "os_report.csv";
  std::filesystem::create_directories(report.parent_path());
  save_os_report(ev, predicted.size(), report);
  std::cout << "eval-os: " << predicted.size() << " subjects, accuracy " << ev.accuracy
            << " -> " << report.string() << "\n";
  write_manifest(cfg, "eval-os", {{"subjects", predicted.size()}});
}

}  // namespace glioseg::cli
