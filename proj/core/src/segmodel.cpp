#include "glioseg/segmodel.hpp"

#include <random>
#include <string>
#include <utility>

#include "checkpoint_io.hpp"
#include "glioseg/volume.hpp"

namespace glioseg {

namespace {
constexpr char kMagic[8] = {'G', 'S', 'E', 'G', 'C', 'K', 'P', '1'};
}

void SegModelConfig::validate() const {
  if (in_channels < 1 || out_channels < 1)
    throw ConfigError("model: channel counts must be positive");
  if (depth < 1) throw ConfigError("model: depth must be at least 1");
  if (base_filters < 1) throw ConfigError("model: base_filters must be positive");
  if (convs_per_block < 1) throw ConfigError("model: convs_per_block must be positive");
  if (!(leaky_slope >= 0.0f)) throw ConfigError("model: leaky_slope must be non-negative");
  const int down = 1 << (depth - 1);
  if (patch_size < down || patch_size % down != 0)
    throw ConfigError("model: patch_size must be a positive multiple of 2^(depth-1)");
}

Tensor4 ResidualStack::forward(const Tensor4& x, bool train) {
  Tensor4 y = x;
  for (auto& cb : blocks) y = cb.forward(y, train);
  add_inplace(y, x);
  return y;
}

Tensor4 ResidualStack::backward(const Tensor4& g) {
  Tensor4 t = g;
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) t = it->backward(t);
  add_inplace(t, g);  // identity branch
  return t;
}

SegModel::SegModel(const SegModelConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {
  cfg_.validate();
  const float slope = cfg_.leaky_slope;

  stem_ = ConvBlock(cfg_.in_channels, cfg_.filters(0), 3, 1, slope);
  for (int l = 0; l < cfg_.depth; ++l)
    enc_.emplace_back(cfg_.filters(l), cfg_.convs_per_block, slope);
  for (int l = 1; l < cfg_.depth; ++l)
    down_.emplace_back(cfg_.filters(l - 1), cfg_.filters(l), 3, 2, slope);
  for (int l = 0; l < cfg_.depth - 1; ++l) {
    dec_a_.emplace_back(cfg_.filters(l + 1) + cfg_.filters(l), cfg_.filters(l), 3, 1, slope);
    dec_b_.emplace_back(cfg_.filters(l), cfg_.filters(l), 3, 1, slope);
  }
  head_ = Conv3d(cfg_.filters(0), cfg_.out_channels, 1, 1);

  // One generator, fixed visit order: initialization is a pure function of
  // (config, seed).
  std::mt19937_64 rng(seed);
  stem_.conv.init_weights(rng);
  for (auto& stack : enc_)
    for (auto& cb : stack.blocks) cb.conv.init_weights(rng);
  for (auto& cb : down_) cb.conv.init_weights(rng);
  for (int l = 0; l < cfg_.depth - 1; ++l) {
    dec_a_[static_cast<std::size_t>(l)].conv.init_weights(rng);
    dec_b_[static_cast<std::size_t>(l)].conv.init_weights(rng);
  }
  head_.init_weights(rng);
}

ProbabilityMaps SegModel::forward(const Tensor4& input, bool train) {
  if (input.channels != cfg_.in_channels) throw DataError("model input channel mismatch");
  const int down = 1 << (cfg_.depth - 1);
  for (int n : {input.shape.nx, input.shape.ny, input.shape.nz})
    if (n < down || n % down != 0)
      throw DataError("model input extent must be a positive multiple of 2^(depth-1)");

  const int depth = cfg_.depth;
  skips_.assign(static_cast<std::size_t>(depth - 1), Tensor4{});
  up_in_shape_.assign(static_cast<std::size_t>(depth - 1), Shape3{});

  Tensor4 x = stem_.forward(input, train);
  x = enc_[0].forward(x, train);
  for (int l = 1; l < depth; ++l) {
    skips_[static_cast<std::size_t>(l - 1)] = x;
    x = down_[static_cast<std::size_t>(l - 1)].forward(x, train);
    x = enc_[static_cast<std::size_t>(l)].forward(x, train);
  }
  for (int l = depth - 2; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    up_in_shape_[li] = x.shape;
    Tensor4 cat = concat_channels(upsample_nearest2(x), skips_[li]);
    skips_[li] = Tensor4{};
    x = dec_a_[li].forward(cat, train);
    x = dec_b_[li].forward(x, train);
  }
  Tensor4 y = sigmoid(head_.forward(x, train));
  sigmoid_out_ = train ? y : Tensor4{};
  return y;
}

void SegModel::backward(const Tensor4& grad_out) {
  if (sigmoid_out_.v.empty()) throw DataError("model backward requires a prior training forward");
  if (!grad_out.same_layout(sigmoid_out_)) throw DataError("model output gradient layout mismatch");

  const int depth = cfg_.depth;
  Tensor4 g = sigmoid_backward(grad_out, sigmoid_out_);
  sigmoid_out_ = Tensor4{};
  g = head_.backward(g);

  std::vector<Tensor4> skip_grads(static_cast<std::size_t>(depth - 1));
  for (int l = 0; l <= depth - 2; ++l) {
    const auto li = static_cast<std::size_t>(l);
    g = dec_b_[li].backward(g);
    g = dec_a_[li].backward(g);
    auto [g_up, g_skip] = split_channels(g, cfg_.filters(l + 1));
    skip_grads[li] = std::move(g_skip);
    g = upsample_nearest2_backward(g_up, up_in_shape_[li]);
  }
  for (int l = depth - 1; l >= 1; --l) {
    g = enc_[static_cast<std::size_t>(l)].backward(g);
    g = down_[static_cast<std::size_t>(l - 1)].backward(g);
    add_inplace(g, skip_grads[static_cast<std::size_t>(l - 1)]);
  }
  g = enc_[0].backward(g);
  stem_.backward(g);  // input gradient is discarded
}

std::vector<ParamView> SegModel::parameters() {
  std::vector<ParamView> out;
  stem_.conv.collect_params("stem", out);
  for (std::size_t l = 0; l < enc_.size(); ++l)
    for (std::size_t i = 0; i < enc_[l].blocks.size(); ++i)
      enc_[l].blocks[i].conv.collect_params(
          "enc" + std::to_string(l) + ".cb" + std::to_string(i), out);
  for (std::size_t l = 0; l < down_.size(); ++l)
    down_[l].conv.collect_params("down" + std::to_string(l + 1), out);
  for (std::size_t l = 0; l < dec_a_.size(); ++l) {
    dec_a_[l].conv.collect_params("dec" + std::to_string(l) + ".a", out);
    dec_b_[l].conv.collect_params("dec" + std::to_string(l) + ".b", out);
  }
  head_.collect_params("head", out);
  return out;
}

std::size_t SegModel::parameter_count() {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.value->size();
  return n;
}

void SegModel::zero_grad() {
  for (auto& p : parameters()) std::fill(p.grad->begin(), p.grad->end(), 0.0f);
}

void SegModel::save(const std::filesystem::path& path) const {
  nlohmann::json header = {
      {"format", 1},
      {"kind", "segmodel"},
      {"seed", seed_},
      {"config",
       {{"in_channels", cfg_.in_channels},
        {"out_channels", cfg_.out_channels},
        {"patch_size", cfg_.patch_size},
        {"depth", cfg_.depth},
        {"base_filters", cfg_.base_filters},
        {"convs_per_block", cfg_.convs_per_block},
        {"leaky_slope", cfg_.leaky_slope}}},
  };
  auto params = const_cast<SegModel*>(this)->parameters();
  std::vector<detail::ParamBlob> blobs;
  blobs.reserve(params.size());
  for (const auto& p : params) blobs.emplace_back(p.name, p.value);
  detail::write_checkpoint(path, kMagic, std::move(header), blobs);
}

SegModel SegModel::load(const std::filesystem::path& path) {
  auto ck = detail::read_checkpoint(path, kMagic);
  if (ck.header.value("kind", std::string()) != "segmodel")
    throw DataError("checkpoint is not a segmentation model: " + path.string());

  SegModelConfig cfg;
  try {
    const auto& jc = ck.header.at("config");
    cfg.in_channels = jc.at("in_channels").get<int>();
    cfg.out_channels = jc.at("out_channels").get<int>();
    cfg.patch_size = jc.at("patch_size").get<int>();
    cfg.depth = jc.at("depth").get<int>();
    cfg.base_filters = jc.at("base_filters").get<int>();
    cfg.convs_per_block = jc.at("convs_per_block").get<int>();
    cfg.leaky_slope = jc.at("leaky_slope").get<float>();
  } catch (const nlohmann::json::exception&) {
    throw DataError("checkpoint config is incomplete: " + path.string());
  }

  SegModel model(cfg, ck.header.value("seed", std::uint64_t{0}));
  auto params = model.parameters();
  if (params.size() != ck.params.size())
    throw DataError("checkpoint parameter list mismatch: " + path.string());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].name != ck.params[i].first ||
        params[i].value->size() != ck.params[i].second.size())
      throw DataError("checkpoint parameter mismatch at " + params[i].name);
    *params[i].value = std::move(ck.params[i].second);
  }
  return model;
}

}  // namespace glioseg
