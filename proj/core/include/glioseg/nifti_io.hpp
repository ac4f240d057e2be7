#pragma once

#include <filesystem>

#include "glioseg/volume.hpp"

namespace glioseg {

// NIfTI-1 single-file volumes (.nii, or .nii.gz via zlib). The canonical
// in-memory axis order is (x, y, z) with x fastest, exactly as stored on disk.
// Big-endian files are byte-swapped on load; scl_slope/scl_inter are applied
// when set. Saved files are little-endian with vox_offset 352.

Volume load_volume(const std::filesystem::path& path);

// Writes float32 voxels.
void save_volume(const Volume& volume, const std::filesystem::path& path);

// Writes uint8 voxels after checking the map against the reference shape.
void save_label_map(const LabelMap& labels, const Volume& ref, const std::filesystem::path& path);

// load_volume plus integer/label-value validation ({0,1,2,4}).
LabelMap load_label_map(const std::filesystem::path& path);

}  // namespace glioseg
