#include <benchmark/benchmark.h>

#include <random>

#include "glioseg/dice_loss.hpp"
#include "glioseg/layers.hpp"
#include "glioseg/metrics.hpp"
#include "glioseg/preprocess.hpp"
#include "glioseg/segmodel.hpp"

namespace {

using namespace glioseg;

Tensor4 random_tensor(int channels, int n, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  Tensor4 t(channels, {n, n, n});
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  for (float& v : t.v) v = dist(rng);
  return t;
}

void BM_Conv3dForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Conv3d conv(16, 16, 3, 1);
  std::mt19937_64 rng(7);
  conv.init_weights(rng);
  const Tensor4 x = random_tensor(16, n, 11);
  for (auto _ : state) {
    Tensor4 y = conv.forward(x, false);
    benchmark::DoNotOptimize(y.v.data());
  }
  state.SetItemsProcessed(state.iterations() * x.shape.count());
}
BENCHMARK(BM_Conv3dForward)->Arg(16)->Arg(32);

void BM_DiceLossAndGrad(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Tensor4 target = random_tensor(3, n, 3);
  for (float& v : target.v) v = v > 0.5f ? 1.0f : 0.0f;
  const Tensor4 pred = random_tensor(3, n, 5);
  Tensor4 grad;
  for (auto _ : state) {
    const double loss = dice_loss_and_grad(target, pred, grad);
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * 3 * target.shape.count());
}
BENCHMARK(BM_DiceLossAndGrad)->Arg(32)->Arg(64);

void BM_Hausdorff95(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  BinaryMask a({n, n, n}), b({n, n, n});
  const int c = n / 2, r1 = n / 4, r2 = n / 4 - 2;
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const int d2 = (x - c) * (x - c) + (y - c) * (y - c) + (z - c) * (z - c);
        a.at(x, y, z) = d2 <= r1 * r1;
        b.at(x, y, z) = d2 <= r2 * r2;
      }
  const Spacing3 spacing{1.0f, 1.0f, 1.0f};
  for (auto _ : state) {
    const double hd = hausdorff95(a, b, spacing);
    benchmark::DoNotOptimize(hd);
  }
}
BENCHMARK(BM_Hausdorff95)->Arg(64)->Arg(128);

void BM_NormalizeScale(benchmark::State& state) {
  Volume v({240, 240, 155});
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<float> dist(0.0f, 2000.0f);
  for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] = i % 7 ? dist(rng) : 0.0f;
  const BinaryMask mask = brain_mask(v);
  for (auto _ : state) {
    Volume scaled = scale(normalize(v, 900.0, 450.0), mask);
    benchmark::DoNotOptimize(scaled.data.data());
  }
  state.SetItemsProcessed(state.iterations() * v.shape.count());
}
BENCHMARK(BM_NormalizeScale);

void BM_SegModelForward(benchmark::State& state) {
  SegModelConfig cfg;
  cfg.patch_size = 32;
  cfg.depth = 3;
  cfg.base_filters = 8;
  SegModel model(cfg, 17);
  const Tensor4 x = random_tensor(4, 32, 29, 0.0f, 110.0f);
  for (auto _ : state) {
    Tensor4 y = model.forward(x, false);
    benchmark::DoNotOptimize(y.v.data());
  }
}
BENCHMARK(BM_SegModelForward);

}  // namespace

BENCHMARK_MAIN();
