#pragma once

#include <vector>

#include "glioseg/tensor.hpp"

namespace glioseg {

// Multi-class soft Dice loss over the (WT, TC, ET) channels:
//   L = -sum_c w_c * (sum Y*P) / (sum Y + sum P + eps)
// The smoothing eps keeps an empty-in-both channel at 0/eps = 0 instead
// of 0/0. Uniform class weights unless configured otherwise.
struct DiceLossConfig {
  double eps = 1e-5;
  std::vector<double> class_weights;  // empty = all ones

  double weight(int c) const {
    return class_weights.empty() ? 1.0 : class_weights.at(static_cast<std::size_t>(c));
  }
};

double dice_loss(const Tensor4& target, const Tensor4& pred, const DiceLossConfig& cfg = {});

Tensor4 dice_loss_grad(const Tensor4& target, const Tensor4& pred, const DiceLossConfig& cfg = {});

// Loss and gradient in one pass (training hot path).
double dice_loss_and_grad(const Tensor4& target, const Tensor4& pred, Tensor4& grad,
                          const DiceLossConfig& cfg = {});

}  // namespace glioseg
