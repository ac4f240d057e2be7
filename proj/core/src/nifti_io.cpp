#include "glioseg/nifti_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

namespace glioseg {

namespace {

// On-disk NIfTI-1 header, 348 bytes.
struct NiftiHeader {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1, intent_p2, intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max, cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax, glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b, quatern_c, quatern_d;
  float qoffset_x, qoffset_y, qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
static_assert(sizeof(NiftiHeader) == 348, "NIfTI-1 header must be 348 bytes");

enum NiftiType : std::int16_t {
  kUint8 = 2,
  kInt16 = 4,
  kInt32 = 8,
  kFloat32 = 16,
  kFloat64 = 64,
  kInt8 = 256,
  kUint16 = 512,
  kUint32 = 768,
};

template <typename T>
void swap_bytes(T& v) {
  auto* p = reinterpret_cast<unsigned char*>(&v);
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(p[i], p[sizeof(T) - 1 - i]);
}

void swap_header(NiftiHeader& h) {
  swap_bytes(h.sizeof_hdr);
  swap_bytes(h.extents);
  swap_bytes(h.session_error);
  for (auto& d : h.dim) swap_bytes(d);
  swap_bytes(h.intent_p1);
  swap_bytes(h.intent_p2);
  swap_bytes(h.intent_p3);
  swap_bytes(h.intent_code);
  swap_bytes(h.datatype);
  swap_bytes(h.bitpix);
  swap_bytes(h.slice_start);
  for (auto& p : h.pixdim) swap_bytes(p);
  swap_bytes(h.vox_offset);
  swap_bytes(h.scl_slope);
  swap_bytes(h.scl_inter);
  swap_bytes(h.slice_end);
  swap_bytes(h.cal_max);
  swap_bytes(h.cal_min);
  swap_bytes(h.slice_duration);
  swap_bytes(h.toffset);
  swap_bytes(h.glmax);
  swap_bytes(h.glmin);
  swap_bytes(h.qform_code);
  swap_bytes(h.sform_code);
  swap_bytes(h.quatern_b);
  swap_bytes(h.quatern_c);
  swap_bytes(h.quatern_d);
  swap_bytes(h.qoffset_x);
  swap_bytes(h.qoffset_y);
  swap_bytes(h.qoffset_z);
  for (auto& v : h.srow_x) swap_bytes(v);
  for (auto& v : h.srow_y) swap_bytes(v);
  for (auto& v : h.srow_z) swap_bytes(v);
}

class GzReader {
 public:
  explicit GzReader(const std::filesystem::path& path) {
    file_ = gzopen(path.string().c_str(), "rb");
    if (!file_) throw DataError("cannot open file: " + path.string());
  }
  ~GzReader() {
    if (file_) gzclose(file_);
  }
  GzReader(const GzReader&) = delete;
  GzReader& operator=(const GzReader&) = delete;

  bool read_exact(void* dst, std::size_t n) {
    std::size_t got = 0;
    auto* p = static_cast<unsigned char*>(dst);
    while (got < n) {
      unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n - got, 1u << 28));
      int r = gzread(file_, p + got, chunk);
      if (r <= 0) return false;
      got += static_cast<std::size_t>(r);
    }
    return true;
  }

  bool skip(std::size_t n) {
    return gzseek(file_, static_cast<z_off_t>(n), SEEK_CUR) >= 0;
  }

 private:
  gzFile file_ = nullptr;
};

class GzWriter {
 public:
  GzWriter(const std::filesystem::path& path, bool compressed) {
    file_ = gzopen(path.string().c_str(), compressed ? "wb" : "wbT");
    if (!file_) throw DataError("cannot open file for writing: " + path.string());
  }
  ~GzWriter() {
    if (file_) gzclose(file_);
  }
  GzWriter(const GzWriter&) = delete;
  GzWriter& operator=(const GzWriter&) = delete;

  void write(const void* src, std::size_t n) {
    std::size_t put = 0;
    const auto* p = static_cast<const unsigned char*>(src);
    while (put < n) {
      unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n - put, 1u << 28));
      int w = gzwrite(file_, p + put, chunk);
      if (w <= 0) throw DataError("write failure");
      put += static_cast<std::size_t>(w);
    }
  }

 private:
  gzFile file_ = nullptr;
};

bool has_gz_suffix(const std::filesystem::path& path) {
  auto s = path.string();
  return s.size() >= 3 && s.compare(s.size() - 3, 3, ".gz") == 0;
}

template <typename T>
void read_voxels(GzReader& in, bool swapped, std::size_t n, float slope, float inter,
                 std::vector<float>& out, const std::string& where) {
  std::vector<T> raw(n);
  if (!in.read_exact(raw.data(), n * sizeof(T)))
    throw DataError("malformed NIfTI file (truncated voxel data): " + where);
  if (swapped && sizeof(T) > 1)
    for (auto& v : raw) swap_bytes(v);
  const bool rescale = slope != 0.0f && !(slope == 1.0f && inter == 0.0f);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    float v = static_cast<float>(raw[i]);
    out[i] = rescale ? v * slope + inter : v;
  }
}

}  // namespace

Volume load_volume(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("missing file: " + path.string());
  GzReader in(path);

  NiftiHeader hdr{};
  if (!in.read_exact(&hdr, sizeof(hdr)))
    throw DataError("malformed NIfTI file (truncated header): " + path.string());

  bool swapped = false;
  if (hdr.sizeof_hdr != 348) {
    swap_header(hdr);
    if (hdr.sizeof_hdr != 348)
      throw DataError("malformed NIfTI file (bad sizeof_hdr): " + path.string());
    swapped = true;
  }
  if (std::strncmp(hdr.magic, "n+1", 3) != 0) {
    if (std::strncmp(hdr.magic, "ni1", 3) == 0)
      throw DataError("two-file NIfTI (.hdr/.img) is not supported: " + path.string());
    throw DataError("malformed NIfTI file (bad magic): " + path.string());
  }

  int ndim = hdr.dim[0];
  if (ndim < 3 || ndim > 7) throw DataError("non-3D image: " + path.string());
  for (int d = 4; d <= ndim; ++d)
    if (hdr.dim[d] > 1) throw DataError("non-3D image: " + path.string());

  Shape3 shape{hdr.dim[1], hdr.dim[2], hdr.dim[3]};
  if (!shape.valid()) throw DataError("malformed NIfTI file (bad dimensions): " + path.string());

  Volume vol;
  vol.shape = shape;
  vol.spacing.x = hdr.pixdim[1] != 0.0f ? std::abs(hdr.pixdim[1]) : 1.0;
  vol.spacing.y = hdr.pixdim[2] != 0.0f ? std::abs(hdr.pixdim[2]) : 1.0;
  vol.spacing.z = hdr.pixdim[3] != 0.0f ? std::abs(hdr.pixdim[3]) : 1.0;

  std::size_t offset = static_cast<std::size_t>(hdr.vox_offset);
  if (offset < sizeof(NiftiHeader))
    throw DataError("malformed NIfTI file (bad vox_offset): " + path.string());
  if (!in.skip(offset - sizeof(NiftiHeader)))
    throw DataError("malformed NIfTI file (short body): " + path.string());

  std::size_t n = static_cast<std::size_t>(shape.count());
  switch (hdr.datatype) {
    case kUint8:
      read_voxels<std::uint8_t>(in, swapped, n, hdr.scl_slope, hdr.scl_inter, vol.data, path.string());
      break;
    case kInt8:
      read_voxels<std::int8_t>(in, swapped, n, hdr.scl_slope, hdr.scl_inter, vol.data, path.string());
      break;
    case kInt16:
      read_voxels<std::int16_t>(in, swapped, n, hdr.scl_slope, hdr.scl_inter, vol.data, path.string());
      break;
    case kUint16:
      read_voxels<std::uint16_t>(in, swapped, n, hdr.scl_slope, hdr.scl_inter, vol.data, path.string());
      break;
    case kInt32:
      read_voxels<std::int32_t>(in, swapped, n, hdr.scl_slope, hdr.scl_inter, vol.data, path.string());
      break;
    case kUint32:
      read_voxels<std::uint32_t>(in, swapped, n, hdr.scl_slope, hdr.scl_inter, vol.data, path.string());
      break;
    case kFloat32:
      read_voxels<float>(in, swapped, n, hdr.scl_slope, hdr.scl_inter, vol.data, path.string());
      break;
    case kFloat64:
      read_voxels<double>(in, swapped, n, hdr.scl_slope, hdr.scl_inter, vol.data, path.string());
      break;
    default:
      throw DataError("unsupported NIfTI datatype " + std::to_string(hdr.datatype) + ": " +
                      path.string());
  }
  return vol;
}

namespace {

NiftiHeader make_header(Shape3 shape, Spacing3 spacing, std::int16_t datatype, std::int16_t bitpix) {
  NiftiHeader hdr{};
  hdr.sizeof_hdr = 348;
  hdr.regular = 'r';
  hdr.dim[0] = 3;
  hdr.dim[1] = static_cast<std::int16_t>(shape.nx);
  hdr.dim[2] = static_cast<std::int16_t>(shape.ny);
  hdr.dim[3] = static_cast<std::int16_t>(shape.nz);
  for (int d = 4; d < 8; ++d) hdr.dim[d] = 1;
  hdr.datatype = datatype;
  hdr.bitpix = bitpix;
  hdr.pixdim[0] = 1.0f;
  hdr.pixdim[1] = static_cast<float>(spacing.x);
  hdr.pixdim[2] = static_cast<float>(spacing.y);
  hdr.pixdim[3] = static_cast<float>(spacing.z);
  for (int d = 4; d < 8; ++d) hdr.pixdim[d] = 1.0f;
  hdr.vox_offset = 352.0f;
  hdr.scl_slope = 1.0f;
  hdr.scl_inter = 0.0f;
  hdr.xyzt_units = 2;  // millimetres
  std::snprintf(hdr.descrip, sizeof(hdr.descrip), "glioseg %s", kVersion);
  hdr.sform_code = 1;
  hdr.srow_x[0] = static_cast<float>(spacing.x);
  hdr.srow_y[1] = static_cast<float>(spacing.y);
  hdr.srow_z[2] = static_cast<float>(spacing.z);
  std::memcpy(hdr.magic, "n+1", 4);
  return hdr;
}

void write_nifti(const std::filesystem::path& path, const NiftiHeader& hdr, const void* data,
                 std::size_t bytes) {
  if (path.has_parent_path() && !path.parent_path().empty() &&
      !std::filesystem::exists(path.parent_path()))
    throw DataError("unwritable path (missing directory): " + path.string());
  GzWriter out(path, has_gz_suffix(path));
  out.write(&hdr, sizeof(hdr));
  const char extender[4] = {0, 0, 0, 0};
  out.write(extender, 4);
  out.write(data, bytes);
}

}  // namespace

void save_volume(const Volume& volume, const std::filesystem::path& path) {
  if (!volume.shape.valid()) throw DataError("cannot save volume with empty shape");
  NiftiHeader hdr = make_header(volume.shape, volume.spacing, kFloat32, 32);
  write_nifti(path, hdr, volume.data.data(), volume.data.size() * sizeof(float));
}

void save_label_map(const LabelMap& labels, const Volume& ref, const std::filesystem::path& path) {
  if (labels.shape != ref.shape)
    throw DataError("label map shape " + labels.shape.str() + " does not match reference shape " +
                    ref.shape.str());
  NiftiHeader hdr = make_header(labels.shape, ref.spacing, kUint8, 8);
  write_nifti(path, hdr, labels.data.data(), labels.data.size());
}

LabelMap load_label_map(const std::filesystem::path& path) {
  Volume v = load_volume(path);
  LabelMap labels;
  labels.shape = v.shape;
  labels.spacing = v.spacing;
  labels.data.resize(v.data.size());
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    float f = v.data[i];
    float r = std::round(f);
    if (std::abs(f - r) > 1e-4f || !is_valid_label(static_cast<std::uint8_t>(r)))
      throw DataError("illegal label value " + std::to_string(f) + " in " + path.string());
    labels.data[i] = static_cast<std::uint8_t>(r);
  }
  return labels;
}

std::string Shape3::str() const {
  return std::to_string(nx) + "x" + std::to_string(ny) + "x" + std::to_string(nz);
}

std::int64_t BinaryMask::count() const {
  std::int64_t n = 0;
  for (auto v : data) n += v != 0;
  return n;
}

const char* modality_suffix(Modality m) {
  switch (m) {
    case Modality::T1: return "t1";
    case Modality::T1Gd: return "t1ce";
    case Modality::T2: return "t2";
    case Modality::Flair: return "flair";
  }
  return "";
}

const char* modality_name(Modality m) {
  switch (m) {
    case Modality::T1: return "T1";
    case Modality::T1Gd: return "T1Gd";
    case Modality::T2: return "T2";
    case Modality::Flair: return "FLAIR";
  }
  return "";
}

const char* resection_status_name(ResectionStatus s) {
  switch (s) {
    case ResectionStatus::GTR: return "GTR";
    case ResectionStatus::STR: return "STR";
    case ResectionStatus::NA: return "NA";
  }
  return "NA";
}

}  // namespace glioseg
