#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glioseg/volume.hpp"

namespace glioseg {

// BraTS directory layout: root/<id>/<id>_{t1,t1ce,t2,flair}[.nii|.nii.gz],
// plus optional <id>_seg for ground truth.
Subject load_subject(const std::filesystem::path& root, const std::string& id);

// Sorted ids of subdirectories that contain all four modality files.
std::vector<std::string> list_subject_ids(const std::filesystem::path& root);

struct SurvivalCsvColumns {
  std::string id = "BraTS19ID";
  std::string age = "Age";
  std::string survival = "Survival";
  std::string resection = "ResectionStatus";
};

// Comma-separated UTF-8 file with a header row. Non-numeric survival cells
// (e.g. "ALIVE") yield an absent survival_days.
std::vector<SurvivalRecord> load_survival_table(const std::filesystem::path& path,
                                                const SurvivalCsvColumns& columns = {});

}  // namespace glioseg
