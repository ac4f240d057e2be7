#include "glioseg/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace glioseg {

namespace {

std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

const char* kRegionNames[3] = {"wt", "tc", "et"};

}  // namespace

void save_seg_report(const std::vector<SubjectScores>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write report: " + path.string());
  out << "subject,region,dice,sensitivity,specificity,hausdorff95,hd95_excluded\n";
  for (const auto& row : rows)
    for (std::size_t r = 0; r < 3; ++r) {
      const RegionScores& s = row.scores[r];
      out << row.id << ',' << kRegionNames[r] << ',' << fmt(s.dice) << ',' << fmt(s.sensitivity)
          << ',' << fmt(s.specificity) << ',' << fmt(s.hausdorff95) << ",\n";
    }

  std::vector<std::array<RegionScores, 3>> all;
  all.reserve(rows.size());
  for (const auto& row : rows) all.push_back(row.scores);
  const auto means = corpus_means(all);
  for (std::size_t r = 0; r < 3; ++r) {
    const RegionMeans& m = means[r];
    out << "mean," << kRegionNames[r] << ',' << fmt(m.dice) << ',' << fmt(m.sensitivity) << ','
        << fmt(m.specificity) << ',' << fmt(m.hausdorff95) << ',' << m.hd95_excluded << '\n';
  }
  if (!out) throw DataError("report write failed: " + path.string());
}

void save_os_predictions(const std::vector<std::pair<std::string, double>>& rows,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write predictions: " + path.string());
  for (const auto& [id, days] : rows) out << id << ',' << fmt(days) << '\n';
  if (!out) throw DataError("prediction write failed: " + path.string());
}

std::vector<std::pair<std::string, double>> load_os_predictions(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read predictions: " + path.string());
  std::vector<std::pair<std::string, double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("prediction row " + std::to_string(lineno) + " malformed: " + path.string());
    try {
      rows.emplace_back(line.substr(0, comma), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw DataError("prediction row " + std::to_string(lineno) + " has a non-numeric value");
    }
  }
  return rows;
}

void save_os_report(const OSEvaluation& ev, std::size_t subjects,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write report: " + path.string());
  out << "subjects,accuracy,mse,median_se,std_se,spearman_r\n";
  out << subjects << ',' << fmt(ev.accuracy) << ',' << fmt(ev.mse) << ',' << fmt(ev.median_se)
      << ',' << fmt(ev.std_se) << ',' << fmt(ev.spearman_r) << '\n';
  if (!out) throw DataError("report write failed: " + path.string());
}

}  // namespace glioseg
