#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "glioseg/labelfuse.hpp"
#include "glioseg/patching.hpp"
#include "glioseg/segmodel.hpp"
#include "glioseg/survival.hpp"
#include "glioseg/training.hpp"

namespace glioseg::cli {

// Resolved run configuration: defaults, then the config file, then --set
// overrides, then --seed/--jobs flags. Unknown keys are rejected so typos
// fail loudly instead of silently running defaults.
struct PipelineConfig {
  nlohmann::json j;

  std::filesystem::path data_root() const;
  std::filesystem::path output_root() const;
  std::uint64_t seed() const;
  int jobs() const;

  PatchConfig patch() const;
  SegModelConfig model() const;
  TrainConfig train() const;
  std::filesystem::path train_init_checkpoint() const;  // empty = fresh init
  FusionConfig fusion() const;
  OSModelConfig survival_model() const;
  SurfaceMode surface_mode() const;

  // Derived locations; explicit config values win over the defaults under
  // output_root.
  std::filesystem::path stats_path() const;
  std::filesystem::path preprocessed_root() const;
  std::filesystem::path predictions_root() const;
  std::filesystem::path checkpoint() const;
  std::filesystem::path os_checkpoint() const;
  std::filesystem::path survival_csv() const;  // relative paths resolve under data_root
};

nlohmann::json default_config();

PipelineConfig load_pipeline_config(const std::string& config_path,
                                    const std::vector<std::string>& overrides,
                                    std::optional<std::uint64_t> seed_flag,
                                    std::optional<int> jobs_flag);

std::uint64_t fnv1a64(const std::string& text);

// Deterministic record of what ran: subcommand, config hash, resolved config.
// Written to <output_root>/manifests/<subcommand>.json on success.
void write_manifest(const PipelineConfig& cfg, const std::string& subcommand,
                    const nlohmann::json& result = nlohmann::json::object());

}  // namespace glioseg::cli
