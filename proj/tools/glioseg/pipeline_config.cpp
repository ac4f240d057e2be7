#include "pipeline_config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace glioseg::cli {

nlohmann::json default_config() {
  return nlohmann::json{
      {"data_root", ""},
      {"output_root", "out"},
      {"seed", 0},
      {"jobs", 1},
      {"stats_path", ""},
      {"preprocessed_root", ""},
      {"predictions_root", ""},
      {"checkpoint", ""},
      {"os_checkpoint", ""},
      {"survival_csv", "survival_data.csv"},
      {"patch",
       {{"patch_size", 128}, {"overlap", 32}, {"start_offset_max", 4}}},
      {"model",
       {{"in_channels", 4},
        {"out_channels", 3},
        {"patch_size", 128},
        {"depth", 5},
        {"base_filters", 16},
        {"convs_per_block", 2},
        {"leaky_slope", 0.01}}},
      {"train",
       {{"lr", 5e-4},
        {"lr_decay", 0.5},
        {"plateau_patience", 10},
        {"plateau_min_delta", 1e-4},
        {"epochs", 100},
        {"batch_size", 1},
        {"max_steps", 0},
        {"init_checkpoint", ""},
        {"augment",
         {{"enabled", true},
          {"flip", true},
          {"rot90", true},
          {"small_rotation", true},
          {"elastic", true},
          {"max_angle_deg", 10.0},
          {"elastic_grid", 8},
          {"elastic_sigma_vox", 2.0},
          {"apply_prob", 0.5}}}}},
      {"fusion", {{"threshold", 0.5}}},
      {"survival",
       {{"hidden_layers", 2},
        {"hidden_units", 64},
        {"lr", 1e-4},
        {"lr_decay", 0.5},
        {"plateau_patience", 10},
        {"plateau_min_delta", 1e-4},
        {"folds", 5},
        {"batch_size", 5},
        {"epochs", 500},
        {"leaky_slope", 0.01},
        {"surface_mode", "gradient_sum"}}},
  };
}

namespace {

void merge_into(nlohmann::json& base, const nlohmann::json& add, const std::string& prefix) {
  if (!add.is_object()) throw ConfigError("config section is not an object: " + prefix);
  for (const auto& [key, value] : add.items()) {
    if (!base.contains(key)) throw ConfigError("unknown config key: " + prefix + key);
    if (base[key].is_object() && value.is_object())
      merge_into(base[key], value, prefix + key + ".");
    else
      base[key] = value;
  }
}

void apply_override(nlohmann::json& j, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set expects key=value, got: " + kv);
  const std::string path = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);

  nlohmann::json* node = &j;
  std::size_t at = 0;
  while (true) {
    const auto dot = path.find('.', at);
    const std::string key = path.substr(at, dot == std::string::npos ? dot : dot - at);
    if (!node->contains(key)) throw ConfigError("unknown config key: " + path);
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    at = dot + 1;
  }
  if (node->is_object()) throw ConfigError("--set cannot replace a config section: " + path);

  // Values that parse as JSON keep their type; anything else is a string.
  const nlohmann::json parsed = nlohmann::json::parse(raw, nullptr, false);
  *node = parsed.is_discarded() || parsed.is_object() || parsed.is_array()
              ? nlohmann::json(raw)
              : parsed;
}

template <typename T>
T typed(const nlohmann::json& j, const char* dotted) {
  const nlohmann::json* node = &j;
  const std::string path(dotted);
  std::size_t at = 0;
  while (true) {
    const auto dot = path.find('.', at);
    node = &node->at(path.substr(at, dot == std::string::npos ? dot : dot - at));
    if (dot == std::string::npos) break;
    at = dot + 1;
  }
  try {
    return node->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config value has the wrong type: ") + dotted);
  }
}

}  // namespace

PipelineConfig load_pipeline_config(const std::string& config_path,
                                    const std::vector<std::string>& overrides,
                                    std::optional<std::uint64_t> seed_flag,
                                    std::optional<int> jobs_flag) {
  PipelineConfig cfg;
  cfg.j = default_config();

  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file: " + config_path);
    nlohmann::json file;
    try {
      file = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }
    merge_into(cfg.j, file, "");
  }
  for (const auto& kv : overrides) apply_override(cfg.j, kv);

  if (typed<std::string>(cfg.j, "data_root").empty()) {
    if (const char* env = std::getenv("GLIOSEG_DATA_ROOT")) cfg.j["data_root"] = env;
  }
  if (seed_flag) cfg.j["seed"] = *seed_flag;
  if (jobs_flag) cfg.j["jobs"] = *jobs_flag;
  return cfg;
}

std::filesystem::path PipelineConfig::data_root() const {
  const auto p = typed<std::string>(j, "data_root");
  if (p.empty())
    throw ConfigError("data_root is not set (config key or GLIOSEG_DATA_ROOT)");
  return p;
}

std::filesystem::path PipelineConfig::output_root() const {
  const auto p = typed<std::string>(j, "output_root");
  if (p.empty()) throw ConfigError("output_root is not set");
  return p;
}

std::uint64_t PipelineConfig::seed() const { return typed<std::uint64_t>(j, "seed"); }

int PipelineConfig::jobs() const {
  const int n = typed<int>(j, "jobs");
  if (n < 1) throw ConfigError("jobs must be at least 1");
  return n;
}

PatchConfig PipelineConfig::patch() const {
  PatchConfig p;
  p.patch_size = typed<int>(j, "patch.patch_size");
  p.overlap = typed<int>(j, "patch.overlap");
  p.start_offset_max = typed<int>(j, "patch.start_offset_max");
  p.validate();
  return p;
}

SegModelConfig PipelineConfig::model() const {
  SegModelConfig m;
  m.in_channels = typed<int>(j, "model.in_channels");
  m.out_channels = typed<int>(j, "model.out_channels");
  m.patch_size = typed<int>(j, "model.patch_size");
  m.depth = typed<int>(j, "model.depth");
  m.base_filters = typed<int>(j, "model.base_filters");
  m.convs_per_block = typed<int>(j, "model.convs_per_block");
  m.leaky_slope = typed<float>(j, "model.leaky_slope");
  m.validate();
  return m;
}

TrainConfig PipelineConfig::train() const {
  TrainConfig t;
  t.lr = typed<double>(j, "train.lr");
  t.lr_decay = typed<double>(j, "train.lr_decay");
  t.plateau_patience = typed<int>(j, "train.plateau_patience");
  t.plateau_min_delta = typed<double>(j, "train.plateau_min_delta");
  t.epochs = typed<int>(j, "train.epochs");
  t.batch_size = typed<int>(j, "train.batch_size");
  t.max_steps = typed<long>(j, "train.max_steps");
  t.seed = seed();
  t.augment_enabled = typed<bool>(j, "train.augment.enabled");
  t.augment.flip = typed<bool>(j, "train.augment.flip");
  t.augment.rot90 = typed<bool>(j, "train.augment.rot90");
  t.augment.small_rotation = typed<bool>(j, "train.augment.small_rotation");
  t.augment.elastic = typed<bool>(j, "train.augment.elastic");
  t.augment.max_angle_deg = typed<float>(j, "train.augment.max_angle_deg");
  t.augment.elastic_grid = typed<int>(j, "train.augment.elastic_grid");
  t.augment.elastic_sigma_vox = typed<float>(j, "train.augment.elastic_sigma_vox");
  t.augment.apply_prob = typed<float>(j, "train.augment.apply_prob");
  t.validate();
  return t;
}

std::filesystem::path PipelineConfig::train_init_checkpoint() const {
  return typed<std::string>(j, "train.init_checkpoint");
}

FusionConfig PipelineConfig::fusion() const {
  FusionConfig f;
  f.threshold = typed<float>(j, "fusion.threshold");
  f.validate();
  return f;
}

OSModelConfig PipelineConfig::survival_model() const {
  OSModelConfig m;
  m.hidden_layers = typed<int>(j, "survival.hidden_layers");
  m.hidden_units = typed<int>(j, "survival.hidden_units");
  m.lr = typed<double>(j, "survival.lr");
  m.lr_decay = typed<double>(j, "survival.lr_decay");
  m.plateau_patience = typed<int>(j, "survival.plateau_patience");
  m.plateau_min_delta = typed<double>(j, "survival.plateau_min_delta");
  m.folds = typed<int>(j, "survival.folds");
  m.batch_size = typed<int>(j, "survival.batch_size");
  m.epochs = typed<int>(j, "survival.epochs");
  m.leaky_slope = typed<float>(j, "survival.leaky_slope");
  m.validate();
  return m;
}

SurfaceMode PipelineConfig::surface_mode() const {
  const auto mode = typed<std::string>(j, "survival.surface_mode");
  if (mode == "gradient_sum") return SurfaceMode::GradientMagnitudeSum;
  if (mode == "nonzero_count") return SurfaceMode::NonzeroGradientCount;
  throw ConfigError("survival.surface_mode must be gradient_sum or nonzero_count");
}

std::filesystem::path PipelineConfig::stats_path() const {
  const auto p = typed<std::string>(j, "stats_path");
  return p.empty() ? output_root() / "stats" / "norm_stats.txt" : std::filesystem::path(p);
}

std::filesystem::path PipelineConfig::preprocessed_root() const {
  const auto p = typed<std::string>(j, "preprocessed_root");
  return p.empty() ? output_root() / "preprocessed" : std::filesystem::path(p);
}

std::filesystem::path PipelineConfig::predictions_root() const {
  const auto p = typed<std::string>(j, "predictions_root");
  return p.empty() ? output_root() / "predictions" : std::filesystem::path(p);
}

std::filesystem::path PipelineConfig::checkpoint() const {
  const auto p = typed<std::string>(j, "checkpoint");
  return p.empty() ? output_root() / "checkpoints" / "final.ckpt" : std::filesystem::path(p);
}

std::filesystem::path PipelineConfig::os_checkpoint() const {
  const auto p = typed<std::string>(j, "os_checkpoint");
  return p.empty() ? output_root() / "checkpoints" / "os_model.ckpt" : std::filesystem::path(p);
}

std::filesystem::path PipelineConfig::survival_csv() const {
  const std::filesystem::path p = typed<std::string>(j, "survival_csv");
  return p.is_absolute() ? p : data_root() / p;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_manifest(const PipelineConfig& cfg, const std::string& subcommand,
                    const nlohmann::json& result) {
  const std::filesystem::path dir = cfg.output_root() / "manifests";
  std::filesystem::create_directories(dir);

  char hash[19];
  std::snprintf(hash, sizeof(hash), "0x%016llx",
                static_cast<unsigned long long>(fnv1a64(cfg.j.dump())));
  nlohmann::json manifest = {
      {"subcommand", subcommand}, {"version", kVersion},  {"config_hash", hash},
      {"seed", cfg.seed()},       {"jobs", cfg.jobs()},   {"config", cfg.j},
  };
  if (!result.empty()) manifest["result"] = result;

  const std::filesystem::path path = dir / (subcommand + ".json");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  out << manifest.dump(2) << '\n';
  if (!out) throw DataError("manifest write failed: " + path.string());
}

}  // namespace glioseg::cli
