#include "glioseg/survival.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "checkpoint_io.hpp"
#include "glioseg/labelfuse.hpp"
#include "glioseg/training.hpp"

namespace glioseg {

namespace {
constexpr char kMagic[8] = {'G', 'S', 'O', 'S', 'C', 'K', 'P', '1'};
}

FeatureVector extract_features(const LabelMap& labels, const BinaryMask& brain, double age,
                               SurfaceMode mode) {
  if (!(labels.shape == brain.shape)) throw DataError("features: label/brain shape mismatch");
  const std::int64_t brain_count = brain.count();
  if (brain_count == 0) throw DataError("features: empty brain mask");

  const auto masks = region_masks(labels);
  const int nx = labels.shape.nx, ny = labels.shape.ny, nz = labels.shape.nz;

  auto surface_term = [&](const BinaryMask& m) {
    auto at = [&](int x, int y, int z) -> double {
      if (x < 0 || x >= nx || y < 0 || y >= ny || z < 0 || z >= nz) return 0.0;
      return m.data[static_cast<std::size_t>(x) +
                    static_cast<std::size_t>(nx) *
                        (static_cast<std::size_t>(y) +
                         static_cast<std::size_t>(ny) * static_cast<std::size_t>(z))]
                 ? 1.0
                 : 0.0;
    };
    double sum = 0.0;
    for (int z = 0; z < nz; ++z)
      for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
          const double gx = 0.5 * (at(x + 1, y, z) - at(x - 1, y, z));
          const double gy = 0.5 * (at(x, y + 1, z) - at(x, y - 1, z));
          const double gz = 0.5 * (at(x, y, z + 1) - at(x, y, z - 1));
          const double mag = std::sqrt(gx * gx + gy * gy + gz * gz);
          if (mode == SurfaceMode::GradientMagnitudeSum)
            sum += mag;
          else if (mag > 0.0)
            sum += 1.0;
        }
    return sum;
  };

  FeatureVector f;
  f.ratio_wt = static_cast<double>(masks[0].count()) / static_cast<double>(brain_count);
  f.ratio_tc = static_cast<double>(masks[1].count()) / static_cast<double>(brain_count);
  f.ratio_et = static_cast<double>(masks[2].count()) / static_cast<double>(brain_count);
  f.surface_wt = surface_term(masks[0]);
  f.surface_tc = surface_term(masks[1]);
  f.surface_et = surface_term(masks[2]);
  f.age = age;
  return f;
}

std::vector<SurvivalRecord> filter_gtr(const std::vector<SurvivalRecord>& records) {
  std::vector<SurvivalRecord> out;
  for (const auto& r : records)
    if (r.resection == ResectionStatus::GTR) out.push_back(r);
  return out;
}

OSBucket bucket(double days) {
  if (days < 300.0) return OSBucket::Short;
  if (days <= 450.0) return OSBucket::Mid;
  return OSBucket::Long;
}

const char* bucket_name(OSBucket b) {
  switch (b) {
    case OSBucket::Short: return "short";
    case OSBucket::Mid: return "mid";
    default: return "long";
  }
}

void OSModelConfig::validate() const {
  if (hidden_layers != 2)
    throw ConfigError("survival: only two hidden layers are supported");
  if (hidden_units < 1) throw ConfigError("survival: hidden_units must be positive");
  if (!(lr > 0.0)) throw ConfigError("survival: learning rate must be positive");
  if (!(lr_decay > 0.0) || lr_decay >= 1.0)
    throw ConfigError("survival: lr_decay must be in (0, 1)");
  if (plateau_patience < 1) throw ConfigError("survival: plateau_patience must be at least 1");
  if (plateau_min_delta < 0.0)
    throw ConfigError("survival: plateau_min_delta must be non-negative");
  if (folds < 2) throw ConfigError("survival: folds must be at least 2");
  if (batch_size < 1) throw ConfigError("survival: batch_size must be positive");
  if (epochs < 1) throw ConfigError("survival: epochs must be positive");
  if (!(leaky_slope >= 0.0f)) throw ConfigError("survival: leaky_slope must be non-negative");
}

namespace {

std::array<float, 7> standardize(const OSFold& f, const FeatureVector& features) {
  const auto raw = features.as_array();
  std::array<float, 7> x;
  for (std::size_t i = 0; i < 7; ++i)
    x[i] = (static_cast<float>(raw[i]) - f.feat_mu[i]) / f.feat_sd[i];
  return x;
}

// 7 -> H -> H -> 1 with leaky ReLU between layers; output on the
// standardized-days scale.
float mlp_forward(const OSFold& f, int H, float slope, const std::array<float, 7>& x,
                  std::vector<float>* h1_out = nullptr, std::vector<float>* h2_out = nullptr) {
  std::vector<float> h1(static_cast<std::size_t>(H)), h2(static_cast<std::size_t>(H));
  for (int i = 0; i < H; ++i) {
    float a = f.b1[static_cast<std::size_t>(i)];
    for (int j = 0; j < 7; ++j) a += f.w1[static_cast<std::size_t>(i * 7 + j)] * x[static_cast<std::size_t>(j)];
    h1[static_cast<std::size_t>(i)] = a > 0.0f ? a : slope * a;
  }
  for (int i = 0; i < H; ++i) {
    float a = f.b2[static_cast<std::size_t>(i)];
    for (int j = 0; j < H; ++j) a += f.w2[static_cast<std::size_t>(i * H + j)] * h1[static_cast<std::size_t>(j)];
    h2[static_cast<std::size_t>(i)] = a > 0.0f ? a : slope * a;
  }
  float y = f.b3[0];
  for (int j = 0; j < H; ++j) y += f.w3[static_cast<std::size_t>(j)] * h2[static_cast<std::size_t>(j)];
  if (h1_out) *h1_out = std::move(h1);
  if (h2_out) *h2_out = std::move(h2);
  return y;
}

double fold_predict_days(const OSFold& f, const OSModelConfig& cfg, const FeatureVector& features) {
  const float y = mlp_forward(f, cfg.hidden_units, cfg.leaky_slope, standardize(f, features));
  return static_cast<double>(y) * f.target_sd + f.target_mu;
}

struct FoldGrads {
  std::vector<float> w1, b1, w2, b2, w3, b3;
};

// Accumulates scaled gradients of (y - t)^2; returns the squared error.
double accumulate_grads(const OSFold& f, int H, float slope, const std::array<float, 7>& x,
                        float t, float scale, FoldGrads& g) {
  std::vector<float> h1, h2;
  const float y = mlp_forward(f, H, slope, x, &h1, &h2);
  const float dy = 2.0f * (y - t) * scale;

  g.b3[0] += dy;
  std::vector<float> gh2(static_cast<std::size_t>(H));
  for (int j = 0; j < H; ++j) {
    g.w3[static_cast<std::size_t>(j)] += dy * h2[static_cast<std::size_t>(j)];
    gh2[static_cast<std::size_t>(j)] = dy * f.w3[static_cast<std::size_t>(j)];
  }
  std::vector<float> gh1(static_cast<std::size_t>(H), 0.0f);
  for (int i = 0; i < H; ++i) {
    const float ga = gh2[static_cast<std::size_t>(i)] *
                     (h2[static_cast<std::size_t>(i)] > 0.0f ? 1.0f : slope);
    g.b2[static_cast<std::size_t>(i)] += ga;
    for (int j = 0; j < H; ++j) {
      g.w2[static_cast<std::size_t>(i * H + j)] += ga * h1[static_cast<std::size_t>(j)];
      gh1[static_cast<std::size_t>(j)] += ga * f.w2[static_cast<std::size_t>(i * H + j)];
    }
  }
  for (int i = 0; i < H; ++i) {
    const float ga = gh1[static_cast<std::size_t>(i)] *
                     (h1[static_cast<std::size_t>(i)] > 0.0f ? 1.0f : slope);
    g.b1[static_cast<std::size_t>(i)] += ga;
    for (int j = 0; j < 7; ++j)
      g.w1[static_cast<std::size_t>(i * 7 + j)] += ga * x[static_cast<std::size_t>(j)];
  }
  const double err = static_cast<double>(y) - t;
  return err * err;
}

OSFold train_fold(const std::vector<OSTrainExample>& examples,
                  const std::vector<std::size_t>& train_idx, const OSModelConfig& cfg,
                  std::mt19937_64& rng) {
  const int H = cfg.hidden_units;
  OSFold fold;

  // Standardization from the training split only. A constant column gets
  // sd 1 so it passes through centered.
  for (std::size_t d = 0; d < 7; ++d) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i : train_idx) {
      const double v = examples[i].features.as_array()[d];
      sum += v;
      sq += v * v;
    }
    const double n = static_cast<double>(train_idx.size());
    const double mu = sum / n;
    const double var = std::max(0.0, sq / n - mu * mu);
    fold.feat_mu[d] = static_cast<float>(mu);
    fold.feat_sd[d] = var > 1e-24 ? static_cast<float>(std::sqrt(var)) : 1.0f;
  }
  {
    double sum = 0.0, sq = 0.0;
    for (std::size_t i : train_idx) {
      sum += examples[i].days;
      sq += examples[i].days * examples[i].days;
    }
    const double n = static_cast<double>(train_idx.size());
    const double mu = sum / n;
    const double var = std::max(0.0, sq / n - mu * mu);
    fold.target_mu = static_cast<float>(mu);
    fold.target_sd = var > 1e-24 ? static_cast<float>(std::sqrt(var)) : 1.0f;
  }

  fold.w1.resize(static_cast<std::size_t>(H) * 7);
  fold.b1.assign(static_cast<std::size_t>(H), 0.0f);
  fold.w2.resize(static_cast<std::size_t>(H) * static_cast<std::size_t>(H));
  fold.b2.assign(static_cast<std::size_t>(H), 0.0f);
  fold.w3.resize(static_cast<std::size_t>(H));
  fold.b3.assign(1, 0.0f);
  auto he_init = [&](std::vector<float>& w, int fan_in) {
    std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / static_cast<float>(fan_in)));
    for (float& v : w) v = dist(rng);
  };
  he_init(fold.w1, 7);
  he_init(fold.w2, H);
  he_init(fold.w3, H);

  // Standardized inputs/targets precomputed once.
  std::vector<std::array<float, 7>> xs;
  std::vector<float> ts;
  xs.reserve(train_idx.size());
  ts.reserve(train_idx.size());
  for (std::size_t i : train_idx) {
    xs.push_back(standardize(fold, examples[i].features));
    ts.push_back((static_cast<float>(examples[i].days) - fold.target_mu) / fold.target_sd);
  }

  FoldGrads g;
  g.w1.assign(fold.w1.size(), 0.0f);
  g.b1.assign(fold.b1.size(), 0.0f);
  g.w2.assign(fold.w2.size(), 0.0f);
  g.b2.assign(fold.b2.size(), 0.0f);
  g.w3.assign(fold.w3.size(), 0.0f);
  g.b3.assign(fold.b3.size(), 0.0f);
  const std::vector<ParamView> params = {
      {"w1", &fold.w1, &g.w1}, {"b1", &fold.b1, &g.b1}, {"w2", &fold.w2, &g.w2},
      {"b2", &fold.b2, &g.b2}, {"w3", &fold.w3, &g.w3}, {"b3", &fold.b3, &g.b3},
  };
  Adam adam;
  adam.lr = cfg.lr;
  adam.init(params);
  PlateauScheduler sched;
  sched.factor = cfg.lr_decay;
  sched.patience = cfg.plateau_patience;
  sched.min_delta = cfg.plateau_min_delta;

  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t at = 0; at < order.size();) {
      const std::size_t take =
          std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - at);
      for (auto& pv : params) std::fill(pv.grad->begin(), pv.grad->end(), 0.0f);
      const float scale = 1.0f / static_cast<float>(take);
      for (std::size_t b = 0; b < take; ++b, ++at)
        loss_sum += accumulate_grads(fold, H, cfg.leaky_slope, xs[order[at]], ts[order[at]],
                                     scale, g);
      adam.step(params);
    }
    adam.lr = sched.observe(loss_sum / static_cast<double>(xs.size()), adam.lr);
  }
  return fold;
}

}  // namespace

double OSModel::predict(const FeatureVector& features) const {
  if (folds.empty()) throw DataError("survival model has no trained folds");
  double sum = 0.0;
  for (const auto& f : folds) sum += fold_predict_days(f, config, features);
  return std::max(0.0, sum / static_cast<double>(folds.size()));
}

double predict_os(const OSModel& model, const FeatureVector& features) {
  return model.predict(features);
}

OSTrainResult train_os(const std::vector<OSTrainExample>& examples, const OSModelConfig& cfg,
                       std::uint64_t seed) {
  cfg.validate();
  if (examples.size() < static_cast<std::size_t>(cfg.folds))
    throw DataError("survival: fewer training records than folds");

  const std::size_t n = examples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 fold_rng(seed);
  std::shuffle(order.begin(), order.end(), fold_rng);
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(cfg.folds));

  OSTrainResult out;
  out.model.config = cfg;
  out.model.seed = seed;

  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t i = 0; i < n; ++i)
      (fold_of[i] == f ? val_idx : train_idx).push_back(i);

    std::mt19937_64 rng(seed * 6364136223846793005ULL + static_cast<std::uint64_t>(f) + 1);
    OSFold fold = train_fold(examples, train_idx, cfg, rng);

    double se_sum = 0.0;
    for (std::size_t i : val_idx) {
      const double pred = std::max(0.0, fold_predict_days(fold, cfg, examples[i].features));
      const double err = pred - examples[i].days;
      se_sum += err * err;
    }
    out.fold_val_mse.push_back(se_sum / static_cast<double>(val_idx.size()));
    out.model.folds.push_back(std::move(fold));
  }
  out.mean_val_mse = std::accumulate(out.fold_val_mse.begin(), out.fold_val_mse.end(), 0.0) /
                     static_cast<double>(out.fold_val_mse.size());
  return out;
}

OSEvaluation evaluate_os(const std::vector<double>& predictions,
                         const std::vector<double>& truths) {
  if (predictions.size() != truths.size())
    throw DataError("evaluation: prediction/truth length mismatch");
  const std::size_t n = predictions.size();
  if (n < 2) throw DataError("evaluation: need at least two records");

  OSEvaluation ev;
  std::vector<double> se(n);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (bucket(predictions[i]) == bucket(truths[i])) ++hits;
    const double d = predictions[i] - truths[i];
    se[i] = d * d;
  }
  ev.accuracy = static_cast<double>(hits) / static_cast<double>(n);
  ev.mse = std::accumulate(se.begin(), se.end(), 0.0) / static_cast<double>(n);

  std::vector<double> sorted = se;
  std::sort(sorted.begin(), sorted.end());
  ev.median_se = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  double dev = 0.0;
  for (double v : se) dev += (v - ev.mse) * (v - ev.mse);
  ev.std_se = std::sqrt(dev / static_cast<double>(n));

  // Spearman: average ranks on ties, then Pearson on the rank vectors.
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t m = v.size();
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(m);
    std::size_t i = 0;
    while (i < m) {
      std::size_t j = i;
      while (j + 1 < m && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rp = ranks(predictions);
  const std::vector<double> rt = ranks(truths);
  double mp = 0.0, mt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mp += rp[i];
    mt += rt[i];
  }
  mp /= static_cast<double>(n);
  mt /= static_cast<double>(n);
  double cov = 0.0, vp = 0.0, vt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (rp[i] - mp) * (rt[i] - mt);
    vp += (rp[i] - mp) * (rp[i] - mp);
    vt += (rt[i] - mt) * (rt[i] - mt);
  }
  ev.spearman_r = (vp > 0.0 && vt > 0.0) ? cov / std::sqrt(vp * vt) : 0.0;
  return ev;
}

void OSModel::save(const std::filesystem::path& path) const {
  nlohmann::json header = {
      {"format", 1},
      {"kind", "osmodel"},
      {"seed", seed},
      {"config",
       {{"hidden_layers", config.hidden_layers},
        {"hidden_units", config.hidden_units},
        {"lr", config.lr},
        {"lr_decay", config.lr_decay},
        {"plateau_patience", config.plateau_patience},
        {"plateau_min_delta", config.plateau_min_delta},
        {"folds", config.folds},
        {"batch_size", config.batch_size},
        {"epochs", config.epochs},
        {"leaky_slope", config.leaky_slope}}},
  };

  std::vector<std::vector<float>> scalers;
  std::vector<detail::ParamBlob> blobs;
  scalers.reserve(folds.size() * 3);  // blobs hold pointers into scalers: no reallocation allowed
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::string p = "fold" + std::to_string(f) + ".";
    const OSFold& fd = folds[f];
    scalers.emplace_back(fd.feat_mu.begin(), fd.feat_mu.end());
    blobs.emplace_back(p + "feat_mu", &scalers.back());
    scalers.emplace_back(fd.feat_sd.begin(), fd.feat_sd.end());
    blobs.emplace_back(p + "feat_sd", &scalers.back());
    scalers.emplace_back(std::vector<float>{fd.target_mu, fd.target_sd});
    blobs.emplace_back(p + "target", &scalers.back());
    blobs.emplace_back(p + "w1", &fd.w1);
    blobs.emplace_back(p + "b1", &fd.b1);
    blobs.emplace_back(p + "w2", &fd.w2);
    blobs.emplace_back(p + "b2", &fd.b2);
    blobs.emplace_back(p + "w3", &fd.w3);
    blobs.emplace_back(p + "b3", &fd.b3);
  }
  detail::write_checkpoint(path, kMagic, std::move(header), blobs);
}

OSModel OSModel::load(const std::filesystem::path& path) {
  auto ck = detail::read_checkpoint(path, kMagic);
  if (ck.header.value("kind", std::string()) != "osmodel")
    throw DataError("checkpoint is not a survival model: " + path.string());

  OSModel model;
  try {
    const auto& jc = ck.header.at("config");
    model.config.hidden_layers = jc.at("hidden_layers").get<int>();
    model.config.hidden_units = jc.at("hidden_units").get<int>();
    model.config.lr = jc.at("lr").get<double>();
    model.config.lr_decay = jc.at("lr_decay").get<double>();
    model.config.plateau_patience = jc.at("plateau_patience").get<int>();
    model.config.plateau_min_delta = jc.at("plateau_min_delta").get<double>();
    model.config.folds = jc.at("folds").get<int>();
    model.config.batch_size = jc.at("batch_size").get<int>();
    model.config.epochs = jc.at("epochs").get<int>();
    model.config.leaky_slope = jc.at("leaky_slope").get<float>();
  } catch (const nlohmann::json::exception&) {
    throw DataError("checkpoint config is incomplete: " + path.string());
  }
  model.seed = ck.header.value("seed", std::uint64_t{0});
  model.config.validate();

  if (ck.params.size() % 9 != 0)
    throw DataError("survival checkpoint has a malformed fold layout: " + path.string());
  const std::size_t nfolds = ck.params.size() / 9;
  const std::size_t H = static_cast<std::size_t>(model.config.hidden_units);
  for (std::size_t f = 0; f < nfolds; ++f) {
    auto blob = [&](std::size_t slot, const char* suffix, std::size_t want) -> std::vector<float>& {
      auto& [name, values] = ck.params[f * 9 + slot];
      if (name != "fold" + std::to_string(f) + "." + suffix || values.size() != want)
        throw DataError("survival checkpoint parameter mismatch at " + name);
      return values;
    };
    OSFold fd;
    const auto& mu = blob(0, "feat_mu", 7);
    std::copy(mu.begin(), mu.end(), fd.feat_mu.begin());
    const auto& sd = blob(1, "feat_sd", 7);
    std::copy(sd.begin(), sd.end(), fd.feat_sd.begin());
    const auto& tg = blob(2, "target", 2);
    fd.target_mu = tg[0];
    fd.target_sd = tg[1];
    fd.w1 = std::move(blob(3, "w1", H * 7));
    fd.b1 = std::move(blob(4, "b1", H));
    fd.w2 = std::move(blob(5, "w2", H * H));
    fd.b2 = std::move(blob(6, "b2", H));
    fd.w3 = std::move(blob(7, "w3", H));
    fd.b3 = std::move(blob(8, "b3", 1));
    model.folds.push_back(std::move(fd));
  }
  return model;
}

void save_features_csv(const std::vector<std::pair<std::string, FeatureVector>>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write features: " + path.string());
  out << "id,ratio_wt,ratio_tc,ratio_et,surface_wt,surface_tc,surface_et,age\n";
  char buf[64];
  for (const auto& [id, f] : rows) {
    out << id;
    for (double v : f.as_array()) {
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("feature write failed: " + path.string());
}

std::vector<std::pair<std::string, FeatureVector>> load_features_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read features: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty feature table: " + path.string());
  if (line != "id,ratio_wt,ratio_tc,ratio_et,surface_wt,surface_tc,surface_et,age")
    throw DataError("unexpected feature table header: " + path.string());

  std::vector<std::pair<std::string, FeatureVector>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8)
      throw DataError("feature table row " + std::to_string(lineno) + " malformed: " +
                      path.string());
    std::array<double, 7> a{};
    for (std::size_t i = 0; i < 7; ++i) {
      try {
        a[i] = std::stod(cells[i + 1]);
      } catch (const std::exception&) {
        throw DataError("feature table row " + std::to_string(lineno) + " has a non-numeric value");
      }
    }
    rows.emplace_back(cells[0], FeatureVector::from_array(a));
  }
  return rows;
}

}  // namespace glioseg
