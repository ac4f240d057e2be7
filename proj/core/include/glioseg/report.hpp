#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "glioseg/metrics.hpp"
#include "glioseg/survival.hpp"

namespace glioseg {

struct SubjectScores {
  std::string id;
  std::array<RegionScores, 3> scores;  // (WT, TC, ET)
};

// One row per subject and region plus mean rows; infinite Hausdorff values
// print as "inf" and the mean rows carry how many were excluded.
void save_seg_report(const std::vector<SubjectScores>& rows, const std::filesystem::path& path);

// Submission-shaped: "id,days" rows, no header.
void save_os_predictions(const std::vector<std::pair<std::string, double>>& rows,
                         const std::filesystem::path& path);
std::vector<std::pair<std::string, double>> load_os_predictions(
    const std::filesystem::path& path);

void save_os_report(const OSEvaluation& ev, std::size_t subjects,
                    const std::filesystem::path& path);

}  // namespace glioseg
