#include "glioseg/preprocess.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace glioseg {

BinaryMask brain_mask(const Volume& volume) {
  BinaryMask mask(volume.shape);
  for (std::size_t i = 0; i < volume.data.size(); ++i) mask.data[i] = volume.data[i] != 0.0f;
  return mask;
}

BinaryMask union_brain_mask(const Subject& subject) {
  BinaryMask mask(subject.modality(Modality::T1).shape);
  for (Modality m : kModalities) {
    const Volume& v = subject.modality(m);
    if (v.shape != mask.shape) throw DataError("subject modalities disagree on shape");
    for (std::size_t i = 0; i < v.data.size(); ++i)
      if (v.data[i] != 0.0f) mask.data[i] = 1;
  }
  return mask;
}

BrainBox bounding_box(const BinaryMask& mask) {
  const Shape3 s = mask.shape;
  BrainBox box;
  box.lo = {s.nx, s.ny, s.nz};
  box.hi = {-1, -1, -1};
  std::size_t i = 0;
  for (int z = 0; z < s.nz; ++z)
    for (int y = 0; y < s.ny; ++y)
      for (int x = 0; x < s.nx; ++x, ++i) {
        if (!mask.data[i]) continue;
        box.lo[0] = std::min(box.lo[0], x);
        box.lo[1] = std::min(box.lo[1], y);
        box.lo[2] = std::min(box.lo[2], z);
        box.hi[0] = std::max(box.hi[0], x);
        box.hi[1] = std::max(box.hi[1], y);
        box.hi[2] = std::max(box.hi[2], z);
      }
  if (box.hi[0] < 0) throw DataError("no brain voxels");
  return box;
}

void NormAccumulator::add_volume(Modality m, const Volume& volume) {
  State& st = state_[static_cast<int>(m)];
  for (float f : volume.data) {
    if (f == 0.0f) continue;
    ++st.n;
    double d = f - st.mean;
    st.mean += d / static_cast<double>(st.n);
    st.m2 += d * (f - st.mean);
  }
}

void NormAccumulator::add(const Subject& subject) {
  for (Modality m : kModalities) add_volume(m, subject.modality(m));
}

NormStats NormAccumulator::finish() const {
  NormStats stats;
  for (Modality m : kModalities) {
    const State& st = state_[static_cast<int>(m)];
    if (st.n == 0)
      throw DataError(std::string("no brain voxels for modality ") + modality_name(m));
    double variance = st.m2 / static_cast<double>(st.n);  // population
    double sigma = std::sqrt(variance);
    if (!(sigma > 0.0))
      throw DataError(std::string("sigma = 0 for modality ") + modality_name(m) +
                      " (all brain voxels identical)");
    stats.of(m) = {st.mean, sigma};
  }
  return stats;
}

NormStats fit_norm_stats(const std::vector<Subject>& subjects) {
  if (subjects.empty()) throw DataError("cannot fit normalization stats on zero subjects");
  NormAccumulator acc;
  for (const Subject& s : subjects) acc.add(s);
  return acc.finish();
}

Volume normalize(const Volume& volume, double mean, double stddev) {
  if (!(stddev > 0.0)) throw DataError("sigma must be positive for normalization");
  Volume out;
  out.shape = volume.shape;
  out.spacing = volume.spacing;
  out.data.resize(volume.data.size());
  const double inv = 1.0 / stddev;
  for (std::size_t i = 0; i < volume.data.size(); ++i) {
    float f = volume.data[i];
    out.data[i] = f == 0.0f ? 0.0f : static_cast<float>((f - mean) * inv);
  }
  return out;
}

Volume scale(const Volume& zscored, const BinaryMask& mask) {
  if (zscored.shape != mask.shape) throw DataError("scale: mask shape mismatch");
  float lo = std::numeric_limits<float>::max();
  float hi = std::numeric_limits<float>::lowest();
  bool any = false;
  for (std::size_t i = 0; i < zscored.data.size(); ++i) {
    if (!mask.data[i]) continue;
    any = true;
    lo = std::min(lo, zscored.data[i]);
    hi = std::max(hi, zscored.data[i]);
  }
  if (!any) throw DataError("no brain voxels");
  if (!(hi > lo)) throw DataError("flat image: masked min equals masked max");

  Volume out;
  out.shape = zscored.shape;
  out.spacing = zscored.spacing;
  out.data.assign(zscored.data.size(), 0.0f);
  const float span = hi - lo;
  for (std::size_t i = 0; i < zscored.data.size(); ++i)
    if (mask.data[i]) out.data[i] = 100.0f * ((zscored.data[i] - lo) / span) + 10.0f;
  return out;
}

Subject preprocess_subject(const Subject& subject, const NormStats& stats) {
  Subject out;
  out.id = subject.id;
  out.label = subject.label;
  out.age = subject.age;
  out.survival_days = subject.survival_days;
  out.resection = subject.resection;
  for (Modality m : kModalities) {
    const Volume& raw = subject.modality(m);
    BinaryMask mask = brain_mask(raw);
    Volume z = normalize(raw, stats.of(m).mean, stats.of(m).stddev);
    out.modality(m) = scale(z, mask);
  }
  return out;
}

void save_norm_stats(const NormStats& stats, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write stats file: " + path.string());
  out << "# brain-wise normalization statistics (pooled nonzero voxels, population std)\n";
  char buf[64];
  for (Modality m : kModalities) {
    std::snprintf(buf, sizeof(buf), "%.17g", stats.of(m).mean);
    out << modality_suffix(m) << ".mu = " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", stats.of(m).stddev);
    out << modality_suffix(m) << ".sigma = " << buf << "\n";
  }
  if (!out) throw DataError("write failure: " + path.string());
}

NormStats load_norm_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing stats file: " + path.string() + " (run fit-stats first)");
  std::map<std::string, double> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key, eq;
    double value;
    if (ss >> key >> eq >> value && eq == "=") kv[key] = value;
  }
  NormStats stats;
  for (Modality m : kModalities) {
    std::string prefix = modality_suffix(m);
    auto mu = kv.find(prefix + ".mu");
    auto sigma = kv.find(prefix + ".sigma");
    if (mu == kv.end() || sigma == kv.end())
      throw DataError("stats file " + path.string() + " is missing entries for " + prefix);
    if (!(sigma->second > 0.0))
      throw DataError("stats file " + path.string() + " has non-positive sigma for " + prefix);
    stats.of(m) = {mu->second, sigma->second};
  }
  return stats;
}

}  // namespace glioseg
