#include "glioseg/layers.hpp"

#include <cmath>

namespace glioseg {

namespace {

Tensor4 pad1(const Tensor4& x) {
  const Shape3 s = x.shape;
  Tensor4 p(x.channels, {s.nx + 2, s.ny + 2, s.nz + 2}, 0.0f);
  const int px = s.nx + 2, py = s.ny + 2;
  for (int c = 0; c < x.channels; ++c) {
    const float* src = x.channel(c);
    float* dst = p.channel(c);
    for (int z = 0; z < s.nz; ++z)
      for (int y = 0; y < s.ny; ++y) {
        const float* sr = src + (static_cast<std::size_t>(z) * s.ny + y) * s.nx;
        float* dr = dst + (static_cast<std::size_t>(z + 1) * py + (y + 1)) * px + 1;
        std::copy(sr, sr + s.nx, dr);
      }
  }
  return p;
}

Tensor4 crop1(const Tensor4& p, Shape3 inner) {
  Tensor4 x(p.channels, inner);
  const int px = inner.nx + 2, py = inner.ny + 2;
  for (int c = 0; c < p.channels; ++c) {
    const float* src = p.channel(c);
    float* dst = x.channel(c);
    for (int z = 0; z < inner.nz; ++z)
      for (int y = 0; y < inner.ny; ++y) {
        const float* sr = src + (static_cast<std::size_t>(z + 1) * py + (y + 1)) * px + 1;
        float* dr = dst + (static_cast<std::size_t>(z) * inner.ny + y) * inner.nx;
        std::copy(sr, sr + inner.nx, dr);
      }
  }
  return x;
}

}  // namespace

Conv3d::Conv3d(int in_ch, int out_ch, int k, int s) : cin(in_ch), cout(out_ch), kernel(k), stride(s) {
  if (k != 1 && k != 3) throw ConfigError("Conv3d supports kernel 1 or 3");
  if (s != 1 && s != 2) throw ConfigError("Conv3d supports stride 1 or 2");
  const std::size_t n = static_cast<std::size_t>(cin) * cout * k * k * k;
  w.assign(n, 0.0f);
  b.assign(cout, 0.0f);
  gw.assign(n, 0.0f);
  gb.assign(cout, 0.0f);
}

void Conv3d::init_weights(std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(cin) * kernel * kernel * kernel;
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
  for (auto& v : w) v = static_cast<float>(dist(rng));
  for (auto& v : b) v = 0.0f;
}

void Conv3d::zero_grad() {
  std::fill(gw.begin(), gw.end(), 0.0f);
  std::fill(gb.begin(), gb.end(), 0.0f);
}

void Conv3d::collect_params(const std::string& prefix, std::vector<ParamView>& out) {
  out.push_back({prefix + ".w", &w, &gw});
  out.push_back({prefix + ".b", &b, &gb});
}

Tensor4 Conv3d::forward(const Tensor4& x, bool train) {
  if (x.channels != cin) throw DataError("Conv3d: channel mismatch");
  in_shape_ = x.shape;

  if (kernel == 1) {
    Tensor4 out(cout, x.shape);
    const std::size_t plane = x.plane();
    for (int co = 0; co < cout; ++co) {
      float* dst = out.channel(co);
      std::fill(dst, dst + plane, b[co]);
      for (int ci = 0; ci < cin; ++ci) {
        const float wv = w[static_cast<std::size_t>(co) * cin + ci];
        const float* src = x.channel(ci);
        for (std::size_t i = 0; i < plane; ++i) dst[i] += wv * src[i];
      }
    }
    if (train) padded_in_ = x;
    return out;
  }

  Tensor4 padded = pad1(x);
  const Shape3 s = x.shape;
  const int px = s.nx + 2, py = s.ny + 2;
  const Shape3 os = stride == 1 ? s : Shape3{s.nx / 2, s.ny / 2, s.nz / 2};
  Tensor4 out(cout, os);

  for (int co = 0; co < cout; ++co) {
    float* out_c = out.channel(co);
    std::fill(out_c, out_c + out.plane(), b[co]);
    for (int ci = 0; ci < cin; ++ci) {
      const float* pc = padded.channel(ci);
      const float* wk = &w[(static_cast<std::size_t>(co) * cin + ci) * 27];
      if (stride == 1) {
        for (int z = 0; z < os.nz; ++z)
          for (int y = 0; y < os.ny; ++y) {
            float* dst = out_c + (static_cast<std::size_t>(z) * os.ny + y) * os.nx;
            for (int kz = 0; kz < 3; ++kz)
              for (int ky = 0; ky < 3; ++ky) {
                const float* sr = pc + (static_cast<std::size_t>(z + kz) * py + (y + ky)) * px;
                const float w0 = wk[(kz * 3 + ky) * 3 + 0];
                const float w1 = wk[(kz * 3 + ky) * 3 + 1];
                const float w2 = wk[(kz * 3 + ky) * 3 + 2];
                for (int xx = 0; xx < os.nx; ++xx)
                  dst[xx] += w0 * sr[xx] + w1 * sr[xx + 1] + w2 * sr[xx + 2];
              }
          }
      } else {
        for (int zo = 0; zo < os.nz; ++zo)
          for (int yo = 0; yo < os.ny; ++yo) {
            float* dst = out_c + (static_cast<std::size_t>(zo) * os.ny + yo) * os.nx;
            for (int kz = 0; kz < 3; ++kz)
              for (int ky = 0; ky < 3; ++ky) {
                const float* sr = pc + (static_cast<std::size_t>(2 * zo + kz) * py + (2 * yo + ky)) * px;
                const float w0 = wk[(kz * 3 + ky) * 3 + 0];
                const float w1 = wk[(kz * 3 + ky) * 3 + 1];
                const float w2 = wk[(kz * 3 + ky) * 3 + 2];
                for (int xo = 0; xo < os.nx; ++xo)
                  dst[xo] += w0 * sr[2 * xo] + w1 * sr[2 * xo + 1] + w2 * sr[2 * xo + 2];
              }
          }
      }
    }
  }
  if (train) padded_in_ = std::move(padded);
  return out;
}

Tensor4 Conv3d::backward(const Tensor4& gout) {
  if (padded_in_.channels == 0)
    throw DataError("Conv3d::backward called without a cached training forward");

  if (kernel == 1) {
    const Tensor4& x = padded_in_;
    const std::size_t plane = x.plane();
    Tensor4 gin(cin, x.shape, 0.0f);
    for (int co = 0; co < cout; ++co) {
      const float* g = gout.channel(co);
      double sb = 0.0;
      for (std::size_t i = 0; i < plane; ++i) sb += g[i];
      gb[co] += static_cast<float>(sb);
      for (int ci = 0; ci < cin; ++ci) {
        const float* src = x.channel(ci);
        float* gi = gin.channel(ci);
        const float wv = w[static_cast<std::size_t>(co) * cin + ci];
        double sw = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
          sw += double(g[i]) * src[i];
          gi[i] += wv * g[i];
        }
        gw[static_cast<std::size_t>(co) * cin + ci] += static_cast<float>(sw);
      }
    }
    return gin;
  }

  const Shape3 s = in_shape_;
  const int px = s.nx + 2, py = s.ny + 2;
  const Shape3 os = gout.shape;
  Tensor4 gpad(cin, {px, py, s.nz + 2}, 0.0f);

  for (int co = 0; co < cout; ++co) {
    const float* g = gout.channel(co);
    double sb = 0.0;
    for (std::size_t i = 0; i < gout.plane(); ++i) sb += g[i];
    gb[co] += static_cast<float>(sb);

    for (int ci = 0; ci < cin; ++ci) {
      const float* pc = padded_in_.channel(ci);
      float* gp = gpad.channel(ci);
      float* gwk = &gw[(static_cast<std::size_t>(co) * cin + ci) * 27];
      const float* wk = &w[(static_cast<std::size_t>(co) * cin + ci) * 27];
      for (int kz = 0; kz < 3; ++kz)
        for (int ky = 0; ky < 3; ++ky) {
          double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0;
          const float w0 = wk[(kz * 3 + ky) * 3 + 0];
          const float w1 = wk[(kz * 3 + ky) * 3 + 1];
          const float w2 = wk[(kz * 3 + ky) * 3 + 2];
          if (stride == 1) {
            for (int z = 0; z < os.nz; ++z)
              for (int y = 0; y < os.ny; ++y) {
                const float* gr = g + (static_cast<std::size_t>(z) * os.ny + y) * os.nx;
                const float* sr = pc + (static_cast<std::size_t>(z + kz) * py + (y + ky)) * px;
                float* dr = gp + (static_cast<std::size_t>(z + kz) * py + (y + ky)) * px;
                for (int xx = 0; xx < os.nx; ++xx) {
                  const float gv = gr[xx];
                  acc0 += double(gv) * sr[xx];
                  acc1 += double(gv) * sr[xx + 1];
                  acc2 += double(gv) * sr[xx + 2];
                  dr[xx] += w0 * gv;
                  dr[xx + 1] += w1 * gv;
                  dr[xx + 2] += w2 * gv;
                }
              }
          } else {
            for (int zo = 0; zo < os.nz; ++zo)
              for (int yo = 0; yo < os.ny; ++yo) {
                const float* gr = g + (static_cast<std::size_t>(zo) * os.ny + yo) * os.nx;
                const float* sr = pc + (static_cast<std::size_t>(2 * zo + kz) * py + (2 * yo + ky)) * px;
                float* dr = gp + (static_cast<std::size_t>(2 * zo + kz) * py + (2 * yo + ky)) * px;
                for (int xo = 0; xo < os.nx; ++xo) {
                  const float gv = gr[xo];
                  acc0 += double(gv) * sr[2 * xo];
                  acc1 += double(gv) * sr[2 * xo + 1];
                  acc2 += double(gv) * sr[2 * xo + 2];
                  dr[2 * xo] += w0 * gv;
                  dr[2 * xo + 1] += w1 * gv;
                  dr[2 * xo + 2] += w2 * gv;
                }
              }
          }
          gwk[(kz * 3 + ky) * 3 + 0] += static_cast<float>(acc0);
          gwk[(kz * 3 + ky) * 3 + 1] += static_cast<float>(acc1);
          gwk[(kz * 3 + ky) * 3 + 2] += static_cast<float>(acc2);
        }
    }
  }
  return crop1(gpad, s);
}

Tensor4 InstanceNorm::forward(const Tensor4& x, bool train) {
  Tensor4 y(x.channels, x.shape);
  const std::size_t plane = x.plane();
  std::vector<float> inv(x.channels);
  for (int c = 0; c < x.channels; ++c) {
    const float* src = x.channel(c);
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      sum += src[i];
      sq += double(src[i]) * src[i];
    }
    const double mean = sum / double(plane);
    const double var = std::max(0.0, sq / double(plane) - mean * mean);
    const float inv_std = static_cast<float>(1.0 / std::sqrt(var + eps));
    inv[c] = inv_std;
    float* dst = y.channel(c);
    const float m = static_cast<float>(mean);
    for (std::size_t i = 0; i < plane; ++i) dst[i] = (src[i] - m) * inv_std;
  }
  if (train) {
    y_ = y;
    inv_std_ = std::move(inv);
  }
  return y;
}

Tensor4 InstanceNorm::backward(const Tensor4& g) {
  const std::size_t plane = g.plane();
  Tensor4 gin(g.channels, g.shape);
  for (int c = 0; c < g.channels; ++c) {
    const float* gr = g.channel(c);
    const float* yr = y_.channel(c);
    double sg = 0.0, sgy = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      sg += gr[i];
      sgy += double(gr[i]) * yr[i];
    }
    const float mg = static_cast<float>(sg / double(plane));
    const float mgy = static_cast<float>(sgy / double(plane));
    const float inv_std = inv_std_[c];
    float* dst = gin.channel(c);
    for (std::size_t i = 0; i < plane; ++i) dst[i] = inv_std * (gr[i] - mg - yr[i] * mgy);
  }
  return gin;
}

Tensor4 LeakyReLU::forward(const Tensor4& x, bool train) {
  Tensor4 y(x.channels, x.shape);
  const float a = slope;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float v = x.v[i];
    y.v[i] = v >= 0.0f ? v : a * v;
  }
  if (train) y_ = y;
  return y;
}

Tensor4 LeakyReLU::backward(const Tensor4& g) {
  Tensor4 gin(g.channels, g.shape);
  const float a = slope;
  for (std::size_t i = 0; i < g.size(); ++i)
    gin.v[i] = y_.v[i] >= 0.0f ? g.v[i] : a * g.v[i];
  return gin;
}

Tensor4 upsample_nearest2(const Tensor4& x) {
  const Shape3 s = x.shape;
  const Shape3 os{s.nx * 2, s.ny * 2, s.nz * 2};
  Tensor4 out(x.channels, os);
  for (int c = 0; c < x.channels; ++c) {
    const float* src = x.channel(c);
    float* dst = out.channel(c);
    for (int z = 0; z < os.nz; ++z)
      for (int y = 0; y < os.ny; ++y) {
        const float* sr = src + (static_cast<std::size_t>(z / 2) * s.ny + y / 2) * s.nx;
        float* dr = dst + (static_cast<std::size_t>(z) * os.ny + y) * os.nx;
        for (int xx = 0; xx < os.nx; ++xx) dr[xx] = sr[xx / 2];
      }
  }
  return out;
}

Tensor4 upsample_nearest2_backward(const Tensor4& g, Shape3 in_shape) {
  Tensor4 gin(g.channels, in_shape, 0.0f);
  const Shape3 os = g.shape;
  for (int c = 0; c < g.channels; ++c) {
    const float* gr = g.channel(c);
    float* dst = gin.channel(c);
    for (int z = 0; z < os.nz; ++z)
      for (int y = 0; y < os.ny; ++y) {
        const float* row = gr + (static_cast<std::size_t>(z) * os.ny + y) * os.nx;
        float* dr = dst + (static_cast<std::size_t>(z / 2) * in_shape.ny + y / 2) * in_shape.nx;
        for (int xx = 0; xx < os.nx; ++xx) dr[xx / 2] += row[xx];
      }
  }
  return gin;
}

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
  if (!(a.shape == b.shape)) throw DataError("concat: spatial shape mismatch");
  Tensor4 out(a.channels + b.channels, a.shape);
  std::copy(a.v.begin(), a.v.end(), out.v.begin());
  std::copy(b.v.begin(), b.v.end(), out.v.begin() + a.v.size());
  return out;
}

std::pair<Tensor4, Tensor4> split_channels(const Tensor4& g, int ca) {
  Tensor4 a(ca, g.shape), b(g.channels - ca, g.shape);
  std::copy(g.v.begin(), g.v.begin() + a.v.size(), a.v.begin());
  std::copy(g.v.begin() + a.v.size(), g.v.end(), b.v.begin());
  return {std::move(a), std::move(b)};
}

void add_inplace(Tensor4& dst, const Tensor4& src) {
  if (!dst.same_layout(src)) throw DataError("add: layout mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst.v[i] += src.v[i];
}

Tensor4 sigmoid(const Tensor4& x) {
  Tensor4 y(x.channels, x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) y.v[i] = 1.0f / (1.0f + std::exp(-x.v[i]));
  return y;
}

Tensor4 sigmoid_backward(const Tensor4& g, const Tensor4& y) {
  Tensor4 gin(g.channels, g.shape);
  for (std::size_t i = 0; i < g.size(); ++i) gin.v[i] = g.v[i] * y.v[i] * (1.0f - y.v[i]);
  return gin;
}

}  // namespace glioseg
