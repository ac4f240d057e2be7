#include "glioseg/dice_loss.hpp"

#include "glioseg/volume.hpp"

namespace glioseg {

namespace {

void check_pair(const Tensor4& target, const Tensor4& pred, const DiceLossConfig& cfg) {
  if (!target.same_layout(pred)) throw DataError("dice loss: target/prediction layout mismatch");
  if (!cfg.class_weights.empty() &&
      cfg.class_weights.size() != static_cast<std::size_t>(target.channels))
    throw ConfigError("dice loss: class weight count does not match channel count");
}

struct ChannelSums {
  double num = 0.0;  // sum Y*P
  double den = 0.0;  // sum Y + sum P + eps
};

ChannelSums channel_sums(const Tensor4& target, const Tensor4& pred, int c, double eps) {
  const std::size_t plane = target.plane();
  const float* y = target.channel(c);
  const float* p = pred.channel(c);
  double num = 0.0, sy = 0.0, sp = 0.0;
  for (std::size_t i = 0; i < plane; ++i) {
    num += static_cast<double>(y[i]) * static_cast<double>(p[i]);
    sy += static_cast<double>(y[i]);
    sp += static_cast<double>(p[i]);
  }
  return {num, sy + sp + eps};
}

}  // namespace

double dice_loss(const Tensor4& target, const Tensor4& pred, const DiceLossConfig& cfg) {
  check_pair(target, pred, cfg);
  double loss = 0.0;
  for (int c = 0; c < target.channels; ++c) {
    const ChannelSums s = channel_sums(target, pred, c, cfg.eps);
    loss -= cfg.weight(c) * s.num / s.den;
  }
  return loss;
}

Tensor4 dice_loss_grad(const Tensor4& target, const Tensor4& pred, const DiceLossConfig& cfg) {
  Tensor4 grad;
  dice_loss_and_grad(target, pred, grad, cfg);
  return grad;
}

double dice_loss_and_grad(const Tensor4& target, const Tensor4& pred, Tensor4& grad,
                          const DiceLossConfig& cfg) {
  check_pair(target, pred, cfg);
  grad = Tensor4(pred.channels, pred.shape);
  const std::size_t plane = target.plane();
  double loss = 0.0;
  for (int c = 0; c < target.channels; ++c) {
    const ChannelSums s = channel_sums(target, pred, c, cfg.eps);
    const double w = cfg.weight(c);
    loss -= w * s.num / s.den;
    // dL/dP_i = -w * (Y_i * den - num) / den^2
    const double inv_den = 1.0 / s.den;
    const double num_over_den2 = s.num * inv_den * inv_den;
    const float* y = target.channel(c);
    float* g = grad.channel(c);
    for (std::size_t i = 0; i < plane; ++i)
      g[i] = static_cast<float>(-(w * (static_cast<double>(y[i]) * inv_den - num_over_den2)));
  }
  return loss;
}

}  // namespace glioseg
