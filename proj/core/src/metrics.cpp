#include "glioseg/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "glioseg/labelfuse.hpp"

namespace glioseg {

namespace {

void check_shapes(Shape3 a, Shape3 b, const char* what) {
  if (!(a == b)) throw DataError(std::string(what) + ": shape mismatch");
}

struct Confusion {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

Confusion count_confusion(const BinaryMask& pred, const BinaryMask& gt) {
  Confusion c;
  const std::size_t n = pred.data.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool p = pred.data[i] != 0, g = gt.data[i] != 0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

// Effectively-infinite initial value for the distance transform; kept finite
// so parabola intersections stay ordered arithmetic.
constexpr double kFar = 1e30;

// Lower envelope of parabolas f[i] + (q - pos[i])^2 sampled at the same
// positions (Felzenszwalb-Huttenlocher, generalized to non-unit spacing).
void edt_1d(const std::vector<double>& f, const std::vector<double>& pos, std::vector<double>& out,
            std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  const double inf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -inf;  // true infinities: the pop loop must stop at k = 0
  z[1] = inf;
  for (int i = 1; i < n; ++i) {
    double s;
    while (true) {
      const int j = v[k];
      s = ((f[i] + pos[i] * pos[i]) - (f[j] + pos[j] * pos[j])) / (2.0 * (pos[i] - pos[j]));
      if (s <= z[k]) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = i;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int i = 0; i < n; ++i) {
    while (z[k + 1] < pos[i]) ++k;
    const double d = pos[i] - pos[v[k]];
    out[i] = d * d + f[v[k]];
  }
}

}  // namespace

double dice(const BinaryMask& pred, const BinaryMask& gt) {
  check_shapes(pred.shape, gt.shape, "dice");
  const Confusion c = count_confusion(pred, gt);
  const std::int64_t den = 2 * c.tp + c.fp + c.fn;
  return den == 0 ? 1.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(den);
}

double sensitivity(const BinaryMask& pred, const BinaryMask& gt) {
  check_shapes(pred.shape, gt.shape, "sensitivity");
  const Confusion c = count_confusion(pred, gt);
  const std::int64_t den = c.tp + c.fn;
  return den == 0 ? 1.0 : static_cast<double>(c.tp) / static_cast<double>(den);
}

double specificity(const BinaryMask& pred, const BinaryMask& gt) {
  check_shapes(pred.shape, gt.shape, "specificity");
  const Confusion c = count_confusion(pred, gt);
  const std::int64_t den = c.tn + c.fp;
  return den == 0 ? 1.0 : static_cast<double>(c.tn) / static_cast<double>(den);
}

BinaryMask surface_voxels(const BinaryMask& mask) {
  const int nx = mask.shape.nx, ny = mask.shape.ny, nz = mask.shape.nz;
  BinaryMask out(mask.shape);
  auto at = [&](int x, int y, int z) -> bool {
    if (x < 0 || x >= nx || y < 0 || y >= ny || z < 0 || z >= nz) return false;
    return mask.data[static_cast<std::size_t>(x) +
                     static_cast<std::size_t>(nx) *
                         (static_cast<std::size_t>(y) +
                          static_cast<std::size_t>(ny) * static_cast<std::size_t>(z))] != 0;
  };
  std::size_t i = 0;
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x, ++i) {
        if (mask.data[i] == 0) continue;
        const bool boundary = !at(x - 1, y, z) || !at(x + 1, y, z) || !at(x, y - 1, z) ||
                              !at(x, y + 1, z) || !at(x, y, z - 1) || !at(x, y, z + 1);
        out.data[i] = boundary ? 1 : 0;
      }
  return out;
}

std::vector<double> squared_distance_field(const BinaryMask& seeds, Spacing3 spacing) {
  const int nx = seeds.shape.nx, ny = seeds.shape.ny, nz = seeds.shape.nz;
  const std::size_t n = seeds.data.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = seeds.data[i] ? 0.0 : kFar;

  const int nmax = std::max({nx, ny, nz});
  std::vector<double> f(static_cast<std::size_t>(nmax)), out(static_cast<std::size_t>(nmax));
  std::vector<double> pos(static_cast<std::size_t>(nmax)), z(static_cast<std::size_t>(nmax) + 1);
  std::vector<int> v(static_cast<std::size_t>(nmax));

  auto idx = [&](int x, int y, int z3) {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(z3));
  };

  // x pass
  f.resize(static_cast<std::size_t>(nx));
  pos.resize(static_cast<std::size_t>(nx));
  for (int i = 0; i < nx; ++i) pos[static_cast<std::size_t>(i)] = i * static_cast<double>(spacing.x);
  for (int zz = 0; zz < nz; ++zz)
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) f[static_cast<std::size_t>(x)] = d[idx(x, y, zz)];
      edt_1d(f, pos, out, v, z);
      for (int x = 0; x < nx; ++x) d[idx(x, y, zz)] = out[static_cast<std::size_t>(x)];
    }

  // y pass
  f.resize(static_cast<std::size_t>(ny));
  pos.resize(static_cast<std::size_t>(ny));
  for (int i = 0; i < ny; ++i) pos[static_cast<std::size_t>(i)] = i * static_cast<double>(spacing.y);
  for (int zz = 0; zz < nz; ++zz)
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) f[static_cast<std::size_t>(y)] = d[idx(x, y, zz)];
      edt_1d(f, pos, out, v, z);
      for (int y = 0; y < ny; ++y) d[idx(x, y, zz)] = out[static_cast<std::size_t>(y)];
    }

  // z pass
  f.resize(static_cast<std::size_t>(nz));
  pos.resize(static_cast<std::size_t>(nz));
  for (int i = 0; i < nz; ++i) pos[static_cast<std::size_t>(i)] = i * static_cast<double>(spacing.z);
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      for (int zz = 0; zz < nz; ++zz) f[static_cast<std::size_t>(zz)] = d[idx(x, y, zz)];
      edt_1d(f, pos, out, v, z);
      for (int zz = 0; zz < nz; ++zz) d[idx(x, y, zz)] = out[static_cast<std::size_t>(zz)];
    }

  return d;
}

double hausdorff95(const BinaryMask& pred, const BinaryMask& gt, Spacing3 spacing) {
  check_shapes(pred.shape, gt.shape, "hausdorff95");
  const bool pred_empty = pred.count() == 0;
  const bool gt_empty = gt.count() == 0;
  if (pred_empty && gt_empty) return 0.0;
  if (pred_empty != gt_empty) return kHD95Inf;

  const BinaryMask sp = surface_voxels(pred);
  const BinaryMask sg = surface_voxels(gt);

  std::vector<double> pooled;
  {
    const std::vector<double> to_gt = squared_distance_field(sg, spacing);
    for (std::size_t i = 0; i < sp.data.size(); ++i)
      if (sp.data[i]) pooled.push_back(std::sqrt(to_gt[i]));
  }
  {
    const std::vector<double> to_pred = squared_distance_field(sp, spacing);
    for (std::size_t i = 0; i < sg.data.size(); ++i)
      if (sg.data[i]) pooled.push_back(std::sqrt(to_pred[i]));
  }

  std::sort(pooled.begin(), pooled.end());
  const std::size_t m = pooled.size();
  if (m == 1) return pooled[0];
  const double h = 0.95 * static_cast<double>(m - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= m) return pooled[m - 1];
  return pooled[lo] + frac * (pooled[lo + 1] - pooled[lo]);
}

std::array<RegionScores, 3> evaluate_subject(const LabelMap& pred, const LabelMap& gt,
                                             Spacing3 spacing) {
  check_shapes(pred.shape, gt.shape, "evaluate_subject");
  const auto pm = region_masks(pred);
  const auto gm = region_masks(gt);
  std::array<RegionScores, 3> out;
  for (std::size_t r = 0; r < 3; ++r) {
    out[r].dice = dice(pm[r], gm[r]);
    out[r].sensitivity = sensitivity(pm[r], gm[r]);
    out[r].specificity = specificity(pm[r], gm[r]);
    out[r].hausdorff95 = hausdorff95(pm[r], gm[r], spacing);
  }
  return out;
}

std::array<RegionMeans, 3> corpus_means(
    const std::vector<std::array<RegionScores, 3>>& per_subject) {
  std::array<RegionMeans, 3> out;
  if (per_subject.empty()) return out;
  const double n = static_cast<double>(per_subject.size());
  for (std::size_t r = 0; r < 3; ++r) {
    double hd_sum = 0.0;
    std::size_t hd_n = 0;
    for (const auto& scores : per_subject) {
      out[r].dice += scores[r].dice / n;
      out[r].sensitivity += scores[r].sensitivity / n;
      out[r].specificity += scores[r].specificity / n;
      if (std::isinf(scores[r].hausdorff95)) {
        ++out[r].hd95_excluded;
      } else {
        hd_sum += scores[r].hausdorff95;
        ++hd_n;
      }
    }
    out[r].hausdorff95 = hd_n ? hd_sum / static_cast<double>(hd_n) : 0.0;
  }
  return out;
}

}  // namespace glioseg
