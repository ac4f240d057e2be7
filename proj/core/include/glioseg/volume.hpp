#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace glioseg {

inline constexpr const char* kVersion = "0.1.0";

// Input/content problems (missing files, malformed data, shape mismatches).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration values or unusable parameter combinations.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Shape3 {
  int nx = 0, ny = 0, nz = 0;

  bool operator==(const Shape3&) const = default;
  std::int64_t count() const { return std::int64_t(nx) * ny * nz; }
  bool valid() const { return nx > 0 && ny > 0 && nz > 0; }
  std::string str() const;
};

struct Spacing3 {
  double x = 1.0, y = 1.0, z = 1.0;
  bool operator==(const Spacing3&) const = default;
};

// One 3D scalar image. Voxels are stored x-fastest: index = x + nx*(y + ny*z),
// matching the NIfTI on-disk order. Background convention: exactly-zero voxels
// lie outside the brain.
struct Volume {
  Shape3 shape;
  Spacing3 spacing;
  std::vector<float> data;

  Volume() = default;
  explicit Volume(Shape3 s, float fill = 0.0f)
      : shape(s), data(static_cast<std::size_t>(s.count()), fill) {}

  std::size_t index(int x, int y, int z) const {
    return std::size_t(x) + std::size_t(shape.nx) * (std::size_t(y) + std::size_t(shape.ny) * z);
  }
  float& at(int x, int y, int z) { return data[index(x, y, z)]; }
  float at(int x, int y, int z) const { return data[index(x, y, z)]; }
};

// Integer segmentation image, values restricted to {0, 1, 2, 4}:
// 1 = necrotic / non-enhancing core, 2 = edema, 4 = enhancing tumor.
struct LabelMap {
  Shape3 shape;
  Spacing3 spacing;
  std::vector<std::uint8_t> data;

  LabelMap() = default;
  explicit LabelMap(Shape3 s, std::uint8_t fill = 0)
      : shape(s), data(static_cast<std::size_t>(s.count()), fill) {}

  std::size_t index(int x, int y, int z) const {
    return std::size_t(x) + std::size_t(shape.nx) * (std::size_t(y) + std::size_t(shape.ny) * z);
  }
  std::uint8_t& at(int x, int y, int z) { return data[index(x, y, z)]; }
  std::uint8_t at(int x, int y, int z) const { return data[index(x, y, z)]; }
};

inline bool is_valid_label(std::uint8_t v) { return v == 0 || v == 1 || v == 2 || v == 4; }

struct BinaryMask {
  Shape3 shape;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  explicit BinaryMask(Shape3 s, std::uint8_t fill = 0)
      : shape(s), data(static_cast<std::size_t>(s.count()), fill) {}

  std::size_t index(int x, int y, int z) const {
    return std::size_t(x) + std::size_t(shape.nx) * (std::size_t(y) + std::size_t(shape.ny) * z);
  }
  std::uint8_t& at(int x, int y, int z) { return data[index(x, y, z)]; }
  std::uint8_t at(int x, int y, int z) const { return data[index(x, y, z)]; }
  std::int64_t count() const;
};

enum class Modality { T1 = 0, T1Gd = 1, T2 = 2, Flair = 3 };

inline constexpr std::array<Modality, 4> kModalities = {Modality::T1, Modality::T1Gd,
                                                        Modality::T2, Modality::Flair};

// File-name suffixes used by the BraTS directory layout.
const char* modality_suffix(Modality m);
const char* modality_name(Modality m);

enum class ResectionStatus { GTR, STR, NA };

const char* resection_status_name(ResectionStatus s);

// Four co-registered modality volumes plus optional ground truth and
// survival metadata.
struct Subject {
  std::string id;
  std::array<Volume, 4> modalities;  // indexed by Modality
  std::optional<LabelMap> label;
  std::optional<double> age;
  std::optional<double> survival_days;
  ResectionStatus resection = ResectionStatus::NA;

  const Volume& modality(Modality m) const { return modalities[static_cast<int>(m)]; }
  Volume& modality(Modality m) { return modalities[static_cast<int>(m)]; }
};

struct SurvivalRecord {
  std::string id;
  double age = 0.0;
  std::optional<double> survival_days;
  ResectionStatus resection = ResectionStatus::NA;
};

}  // namespace glioseg
