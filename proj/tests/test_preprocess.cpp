#include <doctest.h>

#include <cmath>
#include <random>

#include "glioseg/preprocess.hpp"
#include "support/synthetic.hpp"

using namespace glioseg;
using testsup::TempDir;

namespace {

// Subject whose four modalities are copies of one volume.
Subject uniform_subject(const std::string& id, const Volume& v) {
  Subject s;
  s.id = id;
  for (int m = 0; m < 4; ++m) s.modalities[m] = v;
  return s;
}

Volume single_voxel(Shape3 shape, int x, int y, int z, float value) {
  Volume v(shape);
  v.at(x, y, z) = value;
  return v;
}

}  // namespace

TEST_CASE("brain_mask marks exactly the nonzero voxels") {
  Volume v({3, 3, 3});
  v.at(0, 0, 0) = 5.0f;
  v.at(1, 1, 1) = -2.0f;  // negative intensities are still brain
  const BinaryMask m = brain_mask(v);
  CHECK(m.count() == 2);
  CHECK(m.at(0, 0, 0) == 1);
  CHECK(m.at(1, 1, 1) == 1);
  CHECK(m.at(2, 2, 2) == 0);
}

TEST_CASE("bounding_box finds the tight inclusive box") {
  BinaryMask m({12, 25, 35});
  m.at(5, 5, 5) = 1;
  BrainBox b = bounding_box(m);
  CHECK(b.lo == std::array<int, 3>{5, 5, 5});
  CHECK(b.hi == std::array<int, 3>{5, 5, 5});
  CHECK(b.extent(0) == 1);

  m.at(1, 2, 3) = 1;
  m.at(10, 20, 30) = 1;
  b = bounding_box(m);
  CHECK(b.lo == std::array<int, 3>{1, 2, 3});
  CHECK(b.hi == std::array<int, 3>{10, 20, 30});
  CHECK(b.extent(1) == 19);

  CHECK_THROWS_WITH_AS(bounding_box(BinaryMask({4, 4, 4})), "no brain voxels", DataError);
}

TEST_CASE("union_brain_mask covers every modality's brain") {
  Subject s;
  s.id = "u";
  for (int m = 0; m < 4; ++m) s.modalities[m] = Volume({4, 4, 4});
  s.modalities[0].at(0, 0, 0) = 1.0f;
  s.modalities[3].at(3, 3, 3) = 1.0f;
  const BinaryMask u = union_brain_mask(s);
  CHECK(u.count() == 2);
  CHECK(u.at(0, 0, 0) == 1);
  CHECK(u.at(3, 3, 3) == 1);
}

TEST_CASE("pooled stats over two one-voxel brains give the population moments") {
  const Shape3 shape{3, 3, 3};
  const std::vector<Subject> subjects = {
      uniform_subject("a", single_voxel(shape, 0, 0, 0, 10.0f)),
      uniform_subject("b", single_voxel(shape, 1, 1, 1, 20.0f)),
  };
  const NormStats stats = fit_norm_stats(subjects);
  for (Modality m : kModalities) {
    CHECK(stats.of(m).mean == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(stats.of(m).stddev == doctest::Approx(5.0).epsilon(1e-12));
  }
}

TEST_CASE("streaming accumulator matches a two-pass reference on random data") {
  std::mt19937_64 rng(21);
  std::vector<Subject> subjects;
  for (int i = 0; i < 3; ++i)
    subjects.push_back(uniform_subject("s" + std::to_string(i),
                                       testsup::random_brain_volume({14, 12, 10}, rng)));

  // two-pass reference over nonzero voxels of all subjects
  std::vector<double> pool;
  for (const auto& s : subjects)
    for (float v : s.modalities[0].data)
      if (v != 0.0f) pool.push_back(v);
  double mean = 0;
  for (double v : pool) mean += v;
  mean /= static_cast<double>(pool.size());
  double var = 0;
  for (double v : pool) var += (v - mean) * (v - mean);
  var /= static_cast<double>(pool.size());

  const NormStats stats = fit_norm_stats(subjects);
  CHECK(stats.of(Modality::T1).mean == doctest::Approx(mean).epsilon(1e-12));
  CHECK(stats.of(Modality::T1).stddev == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
}

TEST_CASE("fit_norm_stats rejects degenerate corpora") {
  CHECK_THROWS_AS(fit_norm_stats({}), DataError);

  // identical intensity everywhere: zero variance has no usable z-score
  const Volume v = single_voxel({3, 3, 3}, 1, 1, 1, 7.0f);
  CHECK_THROWS_WITH_AS(fit_norm_stats({uniform_subject("a", v), uniform_subject("b", v)}),
                       doctest::Contains("sigma = 0"), DataError);

  const Volume empty({3, 3, 3});
  CHECK_THROWS_WITH_AS(fit_norm_stats({uniform_subject("a", empty)}),
                       doctest::Contains("no brain voxels"), DataError);
}

TEST_CASE("normalize z-scores brain voxels and leaves background at exact zero") {
  Volume v({4, 1, 1});
  v.at(0, 0, 0) = 15.0f;  // == mean -> 0
  v.at(1, 0, 0) = 20.0f;  // mean + sigma -> 1
  v.at(2, 0, 0) = 5.0f;   // mean - 2 sigma -> -2
  // v.at(3,0,0) stays background

  const Volume z = normalize(v, 15.0, 5.0);
  CHECK(z.at(0, 0, 0) == 0.0f);
  CHECK(z.at(1, 0, 0) == doctest::Approx(1.0));
  CHECK(z.at(2, 0, 0) == doctest::Approx(-2.0));
  CHECK(z.at(3, 0, 0) == 0.0f);

  CHECK_THROWS_AS(normalize(v, 15.0, 0.0), DataError);
}

TEST_CASE("scale maps masked min/max onto 10/110 and keeps background zero") {
  Volume z({5, 1, 1});
  z.at(0, 0, 0) = -2.0f;
  z.at(1, 0, 0) = 0.0f;  // z-score 0 is still brain when the mask says so
  z.at(2, 0, 0) = 2.0f;
  BinaryMask mask({5, 1, 1});
  mask.at(0, 0, 0) = mask.at(1, 0, 0) = mask.at(2, 0, 0) = 1;

  const Volume s = scale(z, mask);
  CHECK(s.at(0, 0, 0) == doctest::Approx(10.0));
  CHECK(s.at(1, 0, 0) == doctest::Approx(60.0));  // midpoint
  CHECK(s.at(2, 0, 0) == doctest::Approx(110.0));
  CHECK(s.at(3, 0, 0) == 0.0f);
  CHECK(s.at(4, 0, 0) == 0.0f);
}

TEST_CASE("scale rejects empty masks and flat images") {
  Volume z({3, 1, 1});
  CHECK_THROWS_WITH_AS(scale(z, BinaryMask({3, 1, 1})), doctest::Contains("no brain voxels"),
                       DataError);

  z.at(0, 0, 0) = 1.0f;
  z.at(1, 0, 0) = 1.0f;
  BinaryMask mask({3, 1, 1});
  mask.at(0, 0, 0) = mask.at(1, 0, 0) = 1;
  CHECK_THROWS_WITH_AS(scale(z, mask), doctest::Contains("flat image"), DataError);
}

TEST_CASE("preprocess_subject lands brain voxels in [10,110] with exact endpoints") {
  std::mt19937_64 rng(5);
  std::vector<Subject> subjects;
  for (int i = 0; i < 2; ++i) {
    Subject s;
    s.id = "p" + std::to_string(i);
    for (int m = 0; m < 4; ++m)
      s.modalities[m] = testsup::random_brain_volume({20, 18, 16}, rng);
    LabelMap labels({20, 18, 16});
    labels.at(10, 9, 8) = 4;
    s.label = labels;
    s.age = 55.0;
    subjects.push_back(std::move(s));
  }

  const NormStats stats = fit_norm_stats(subjects);
  const Subject out = preprocess_subject(subjects[0], stats);

  for (Modality m : kModalities) {
    const Volume& raw = subjects[0].modality(m);
    const Volume& v = out.modality(m);
    float lo = 1e30f, hi = -1e30f;
    for (std::size_t i = 0; i < v.data.size(); ++i) {
      if (raw.data[i] == 0.0f) {
        CHECK(v.data[i] == 0.0f);
        continue;
      }
      CHECK(v.data[i] >= 10.0f - 1e-6f);
      CHECK(v.data[i] <= 110.0f + 1e-6f);
      lo = std::min(lo, v.data[i]);
      hi = std::max(hi, v.data[i]);
    }
    CHECK(lo == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(hi == doctest::Approx(110.0).epsilon(1e-6));
  }

  // labels and metadata ride along untouched
  REQUIRE(out.label.has_value());
  CHECK(out.label->at(10, 9, 8) == 4);
  CHECK(out.age == subjects[0].age);
}

TEST_CASE("norm stats survive a save/load round trip at full precision") {
  TempDir tmp;
  NormStats stats;
  stats.of(Modality::T1) = {123.456789012345, 67.890123456789};
  stats.of(Modality::T1Gd) = {1e-3, 2.5e4};
  stats.of(Modality::T2) = {355.0 / 113.0, 1.0 / 3.0};
  stats.of(Modality::Flair) = {42.0, 7.0};

  const auto path = tmp / "norm_stats.txt";
  save_norm_stats(stats, path);
  const NormStats r = load_norm_stats(path);
  for (Modality m : kModalities) {
    CHECK(std::abs(r.of(m).mean - stats.of(m).mean) <=
          1e-12 * std::max(1.0, std::abs(stats.of(m).mean)));
    CHECK(std::abs(r.of(m).stddev - stats.of(m).stddev) <=
          1e-12 * std::max(1.0, std::abs(stats.of(m).stddev)));
  }

  CHECK_THROWS_AS(load_norm_stats(tmp / "absent.txt"), DataError);
}
