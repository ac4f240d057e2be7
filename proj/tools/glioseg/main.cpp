#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using Command = void (*)(const glioseg::cli::PipelineConfig&);

struct SubcommandDef {
  const char* name;
  const char* description;
  Command run;
};

const SubcommandDef kSubcommands[] = {
    {"fit-stats", "Fit per-modality normalization statistics over the training corpus",
     glioseg::cli::cmd_fit_stats},
    {"preprocess", "Normalize and scale subjects using fitted statistics",
     glioseg::cli::cmd_preprocess},
    {"train-seg", "Train the segmentation network (both patching phases)",
     glioseg::cli::cmd_train_seg},
    {"predict-seg", "Predict and fuse label maps for preprocessed subjects",
     glioseg::cli::cmd_predict_seg},
    {"eval-seg", "Score predictions against ground truth (Dice, sensitivity, specificity, HD95)",
     glioseg::cli::cmd_eval_seg},
    {"extract-features", "Extract survival regression features from predicted label maps",
     glioseg::cli::cmd_extract_features},
    {"train-os", "Train the survival regressor with cross validation",
     glioseg::cli::cmd_train_os},
    {"predict-os", "Predict overall survival days from extracted features",
     glioseg::cli::cmd_predict_os},
    {"eval-os", "Score survival predictions against recorded outcomes",
     glioseg::cli::cmd_eval_os},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glioseg: glioma segmentation and overall-survival pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", overrides, "override a config key (dot.path=value), repeatable");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--jobs", jobs, "subject-level parallelism (default 1, deterministic)");

  Command selected = nullptr;
  for (const auto& def : kSubcommands) {
    CLI::App* sub = app.add_subcommand(def.name, def.description);
    sub->callback([&selected, &def] { selected = def.run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const auto cfg = glioseg::cli::load_pipeline_config(config_path, overrides, seed, jobs);
    selected(cfg);
    return 0;
  } catch (const glioseg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const glioseg::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
