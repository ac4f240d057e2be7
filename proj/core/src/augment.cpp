#include "glioseg/augment.hpp"

#include <cmath>
#include <cstddef>

#include "glioseg/volume.hpp"

namespace glioseg {

namespace {

void check_axis(int axis) {
  if (axis < 0 || axis > 2) throw ConfigError("augment: axis must be 0, 1 or 2");
}

// Per-voxel source coordinates for one interpolated transform.
struct CoordField {
  Shape3 shape;
  std::vector<float> sx, sy, sz;
};

CoordField make_field(Shape3 shape) {
  CoordField f;
  f.shape = shape;
  f.sx.resize(shape.count());
  f.sy.resize(shape.count());
  f.sz.resize(shape.count());
  return f;
}

// Trilinear sampling with zero outside the volume, matching the
// background-zero convention of the normalized images.
Tensor4 resample(const Tensor4& t, const CoordField& f) {
  Tensor4 out(t.channels, f.shape);
  const int nx = t.shape.nx, ny = t.shape.ny, nz = t.shape.nz;
  const std::size_t n = f.shape.count();
  for (int c = 0; c < t.channels; ++c) {
    const float* src = t.channel(c);
    float* dst = out.channel(c);
    for (std::size_t i = 0; i < n; ++i) {
      const float u = f.sx[i], v = f.sy[i], w = f.sz[i];
      const int x0 = static_cast<int>(std::floor(u));
      const int y0 = static_cast<int>(std::floor(v));
      const int z0 = static_cast<int>(std::floor(w));
      const float fx = u - static_cast<float>(x0);
      const float fy = v - static_cast<float>(y0);
      const float fz = w - static_cast<float>(z0);
      float acc = 0.0f;
      for (int dz = 0; dz < 2; ++dz) {
        const int z = z0 + dz;
        if (z < 0 || z >= nz) continue;
        const float wz = dz ? fz : 1.0f - fz;
        for (int dy = 0; dy < 2; ++dy) {
          const int y = y0 + dy;
          if (y < 0 || y >= ny) continue;
          const float wyz = (dy ? fy : 1.0f - fy) * wz;
          for (int dx = 0; dx < 2; ++dx) {
            const int x = x0 + dx;
            if (x < 0 || x >= nx) continue;
            acc += (dx ? fx : 1.0f - fx) * wyz *
                   src[static_cast<std::size_t>(x) +
                       static_cast<std::size_t>(nx) *
                           (static_cast<std::size_t>(y) +
                            static_cast<std::size_t>(ny) * static_cast<std::size_t>(z))];
          }
        }
      }
      dst[i] = acc;
    }
  }
  return out;
}

void rebinarize(Tensor4& target) {
  for (float& v : target.v) v = v >= 0.5f ? 1.0f : 0.0f;
}

CoordField rotation_coords(Shape3 shape, int axis, float angle_rad) {
  CoordField f = make_field(shape);
  // Source position is the inverse rotation of the output position about the
  // volume center.
  const float c = std::cos(-angle_rad), s = std::sin(-angle_rad);
  const float cx = 0.5f * static_cast<float>(shape.nx - 1);
  const float cy = 0.5f * static_cast<float>(shape.ny - 1);
  const float cz = 0.5f * static_cast<float>(shape.nz - 1);
  std::size_t i = 0;
  for (int z = 0; z < shape.nz; ++z)
    for (int y = 0; y < shape.ny; ++y)
      for (int x = 0; x < shape.nx; ++x, ++i) {
        const float px = static_cast<float>(x) - cx;
        const float py = static_cast<float>(y) - cy;
        const float pz = static_cast<float>(z) - cz;
        float qx = px, qy = py, qz = pz;
        switch (axis) {
          case 0: qy = c * py - s * pz; qz = s * py + c * pz; break;
          case 1: qx = c * px + s * pz; qz = -s * px + c * pz; break;
          default: qx = c * px - s * py; qy = s * px + c * py; break;
        }
        f.sx[i] = qx + cx;
        f.sy[i] = qy + cy;
        f.sz[i] = qz + cz;
      }
  return f;
}

// Random displacements on a coarse control lattice, trilinearly upsampled to
// a smooth per-voxel field.
CoordField elastic_coords(Shape3 shape, int grid, float sigma, std::mt19937_64& rng) {
  if (grid < 2) throw ConfigError("augment: elastic_grid must be at least 2");
  const std::size_t gcount =
      static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid) * static_cast<std::size_t>(grid);
  std::normal_distribution<float> noise(0.0f, sigma);
  std::array<std::vector<float>, 3> ctrl;
  for (auto& comp : ctrl) {
    comp.resize(gcount);
    for (float& v : comp) v = noise(rng);
  }

  CoordField f = make_field(shape);
  const float gx = shape.nx > 1 ? static_cast<float>(grid - 1) / static_cast<float>(shape.nx - 1) : 0.0f;
  const float gy = shape.ny > 1 ? static_cast<float>(grid - 1) / static_cast<float>(shape.ny - 1) : 0.0f;
  const float gz = shape.nz > 1 ? static_cast<float>(grid - 1) / static_cast<float>(shape.nz - 1) : 0.0f;

  auto lattice = [&](const std::vector<float>& comp, float u, float v, float w) {
    const int x0 = std::min(static_cast<int>(u), grid - 2);
    const int y0 = std::min(static_cast<int>(v), grid - 2);
    const int z0 = std::min(static_cast<int>(w), grid - 2);
    const float fx = u - static_cast<float>(x0);
    const float fy = v - static_cast<float>(y0);
    const float fz = w - static_cast<float>(z0);
    float acc = 0.0f;
    for (int dz = 0; dz < 2; ++dz)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          acc += (dx ? fx : 1.0f - fx) * (dy ? fy : 1.0f - fy) * (dz ? fz : 1.0f - fz) *
                 comp[static_cast<std::size_t>(x0 + dx) +
                      static_cast<std::size_t>(grid) *
                          (static_cast<std::size_t>(y0 + dy) +
                           static_cast<std::size_t>(grid) * static_cast<std::size_t>(z0 + dz))];
    return acc;
  };

  std::size_t i = 0;
  for (int z = 0; z < shape.nz; ++z)
    for (int y = 0; y < shape.ny; ++y)
      for (int x = 0; x < shape.nx; ++x, ++i) {
        const float u = static_cast<float>(x) * gx;
        const float v = static_cast<float>(y) * gy;
        const float w = static_cast<float>(z) * gz;
        f.sx[i] = static_cast<float>(x) + lattice(ctrl[0], u, v, w);
        f.sy[i] = static_cast<float>(y) + lattice(ctrl[1], u, v, w);
        f.sz[i] = static_cast<float>(z) + lattice(ctrl[2], u, v, w);
      }
  return f;
}

}  // namespace

Tensor4 flip_axis(const Tensor4& x, int axis) {
  check_axis(axis);
  Tensor4 out(x.channels, x.shape);
  const int nx = x.shape.nx, ny = x.shape.ny, nz = x.shape.nz;
  for (int c = 0; c < x.channels; ++c)
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const int si = axis == 0 ? nx - 1 - i : i;
          const int sj = axis == 1 ? ny - 1 - j : j;
          const int sk = axis == 2 ? nz - 1 - k : k;
          out.v[out.index(c, i, j, k)] = x.v[x.index(c, si, sj, sk)];
        }
  return out;
}

Tensor4 rotate90(const Tensor4& x, int axis, int quarter_turns) {
  check_axis(axis);
  int turns = ((quarter_turns % 4) + 4) % 4;
  Tensor4 cur = x;
  for (; turns > 0; --turns) {
    const Shape3 in = cur.shape;
    Shape3 os;
    switch (axis) {  // one quarter turn in the plane orthogonal to `axis`
      case 0: os = {in.nx, in.nz, in.ny}; break;
      case 1: os = {in.nz, in.ny, in.nx}; break;
      default: os = {in.ny, in.nx, in.nz}; break;
    }
    Tensor4 out(cur.channels, os);
    for (int c = 0; c < cur.channels; ++c)
      for (int k = 0; k < os.nz; ++k)
        for (int j = 0; j < os.ny; ++j)
          for (int i = 0; i < os.nx; ++i) {
            int si, sj, sk;
            switch (axis) {
              case 0: si = i; sj = k; sk = in.nz - 1 - j; break;
              case 1: si = k; sj = j; sk = in.nz - 1 - i; break;
              default: si = j; sj = in.ny - 1 - i; sk = k; break;
            }
            out.v[out.index(c, i, j, k)] = cur.v[cur.index(c, si, sj, sk)];
          }
    cur = std::move(out);
  }
  return cur;
}

void augment_pair(Tensor4& image, Tensor4& target, const AugmentOptions& opt,
                  std::mt19937_64& rng) {
  if (image.shape.nx != target.shape.nx || image.shape.ny != target.shape.ny ||
      image.shape.nz != target.shape.nz)
    throw DataError("augment: image/target shape mismatch");

  std::bernoulli_distribution fire(opt.apply_prob);
  std::uniform_int_distribution<int> pick_axis(0, 2);

  if (opt.flip) {
    for (int axis = 0; axis < 3; ++axis) {
      if (std::bernoulli_distribution(0.5)(rng)) {
        image = flip_axis(image, axis);
        target = flip_axis(target, axis);
      }
    }
  }
  if (opt.rot90 && fire(rng)) {
    const int axis = pick_axis(rng);
    const int turns = std::uniform_int_distribution<int>(1, 3)(rng);
    image = rotate90(image, axis, turns);
    target = rotate90(target, axis, turns);
  }
  if (opt.small_rotation && fire(rng)) {
    const int axis = pick_axis(rng);
    const float deg = std::uniform_real_distribution<float>(-opt.max_angle_deg,
                                                            opt.max_angle_deg)(rng);
    const CoordField f = rotation_coords(image.shape, axis, deg * 3.14159265358979323846f / 180.0f);
    image = resample(image, f);
    target = resample(target, f);
    rebinarize(target);
  }
  if (opt.elastic && fire(rng)) {
    const CoordField f = elastic_coords(image.shape, opt.elastic_grid, opt.elastic_sigma_vox, rng);
    image = resample(image, f);
    target = resample(target, f);
    rebinarize(target);
  }
}

}  // namespace glioseg
