#include "glioseg/subject_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "glioseg/nifti_io.hpp"

namespace glioseg {

namespace {

std::filesystem::path find_nifti(const std::filesystem::path& dir, const std::string& stem) {
  for (const char* ext : {".nii.gz", ".nii"}) {
    auto p = dir / (stem + ext);
    if (std::filesystem::exists(p)) return p;
  }
  return {};
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

Subject load_subject(const std::filesystem::path& root, const std::string& id) {
  auto dir = root / id;
  if (!std::filesystem::is_directory(dir))
    throw DataError("missing subject directory: " + dir.string());

  Subject subject;
  subject.id = id;
  for (Modality m : kModalities) {
    auto path = find_nifti(dir, id + "_" + modality_suffix(m));
    if (path.empty())
      throw DataError("subject " + id + " is missing modality file " + id + "_" +
                      modality_suffix(m));
    subject.modality(m) = load_volume(path);
  }

  const Shape3 shape = subject.modality(Modality::T1).shape;
  const Spacing3 spacing = subject.modality(Modality::T1).spacing;
  for (Modality m : kModalities) {
    const Volume& v = subject.modality(m);
    if (v.shape != shape)
      throw DataError("subject " + id + ": modality " + modality_name(m) + " shape " +
                      v.shape.str() + " differs from " + shape.str());
    if (v.spacing != spacing)
      throw DataError("subject " + id + ": modality " + modality_name(m) +
                      " spacing differs from the other modalities");
  }

  auto seg = find_nifti(dir, id + "_seg");
  if (!seg.empty()) {
    LabelMap labels = load_label_map(seg);
    if (labels.shape != shape)
      throw DataError("subject " + id + ": label shape " + labels.shape.str() +
                      " differs from modality shape " + shape.str());
    subject.label = std::move(labels);
  }
  return subject;
}

std::vector<std::string> list_subject_ids(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root))
    throw DataError("missing data directory: " + root.string());
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    std::string id = entry.path().filename().string();
    bool complete = true;
    for (Modality m : kModalities)
      if (find_nifti(entry.path(), id + "_" + modality_suffix(m)).empty()) complete = false;
    if (complete) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<SurvivalRecord> load_survival_table(const std::filesystem::path& path,
                                                const SurvivalCsvColumns& columns) {
  std::ifstream in(path);
  if (!in) throw DataError("missing survival table: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty survival table: " + path.string());
  auto header = split_csv_line(line);

  auto column_index = [&](const std::string& name, bool required) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    if (required)
      throw DataError("survival table " + path.string() + " is missing column '" + name + "'");
    return -1;
  };
  const int id_col = column_index(columns.id, true);
  const int age_col = column_index(columns.age, true);
  const int survival_col = column_index(columns.survival, false);
  const int resection_col = column_index(columns.resection, false);

  std::vector<SurvivalRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    auto cell = [&](int idx) -> std::string {
      return idx >= 0 && idx < static_cast<int>(cells.size()) ? cells[idx] : "";
    };

    SurvivalRecord rec;
    rec.id = cell(id_col);
    try {
      std::size_t pos = 0;
      std::string age_str = cell(age_col);
      rec.age = std::stod(age_str, &pos);
      if (pos != age_str.size()) throw std::invalid_argument(age_str);
    } catch (const std::exception&) {
      throw DataError("survival table " + path.string() + " line " + std::to_string(line_no) +
                      ": unparseable age '" + cell(age_col) + "'");
    }
    if (rec.age <= 0.0)
      throw DataError("survival table " + path.string() + " line " + std::to_string(line_no) +
                      ": non-positive age");

    if (survival_col >= 0) {
      std::string sv = cell(survival_col);
      try {
        std::size_t pos = 0;
        double days = std::stod(sv, &pos);
        if (pos == sv.size() && days >= 0.0) rec.survival_days = days;
      } catch (const std::exception&) {
        // non-numeric cells ("ALIVE", blanks) mean unknown survival
      }
    }

    std::string rs = cell(resection_col);
    if (rs == "GTR")
      rec.resection = ResectionStatus::GTR;
    else if (rs == "STR")
      rec.resection = ResectionStatus::STR;
    else
      rec.resection = ResectionStatus::NA;

    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace glioseg
