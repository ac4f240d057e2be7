#pragma once

#include <random>
#include <string>
#include <vector>

#include "glioseg/tensor.hpp"

namespace glioseg {

// Named view into a layer's parameters and their gradient buffer; the
// optimizer and the checkpoint writer both walk these.
struct ParamView {
  std::string name;
  std::vector<float>* value;
  std::vector<float>* grad;
};

// 3D convolution, kernel 1 or 3, stride 1 or 2, zero "same" padding for
// kernel 3. Weight layout: [out][in][kz][ky][kx].
struct Conv3d {
  int cin = 0, cout = 0, kernel = 3, stride = 1;
  std::vector<float> w, b, gw, gb;

  Conv3d() = default;
  Conv3d(int in_ch, int out_ch, int k, int s);

  void init_weights(std::mt19937_64& rng);  // He-normal fan-in
  Tensor4 forward(const Tensor4& x, bool train);
  Tensor4 backward(const Tensor4& grad_out);  // accumulates gw/gb, returns grad wrt input
  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamView>& out);

 private:
  Tensor4 padded_in_;  // cached while training (the raw input for kernel 1)
  Shape3 in_shape_;
};

// Per-channel, per-sample normalization without learned affine terms.
// An all-constant channel comes out as zeros (variance floor eps).
struct InstanceNorm {
  float eps = 1e-5f;

  Tensor4 forward(const Tensor4& x, bool train);
  Tensor4 backward(const Tensor4& grad_out);

 private:
  Tensor4 y_;
  std::vector<float> inv_std_;
};

struct LeakyReLU {
  float slope = 0.01f;

  Tensor4 forward(const Tensor4& x, bool train);
  Tensor4 backward(const Tensor4& grad_out);

 private:
  Tensor4 y_;
};

// Conv3d -> instance norm -> leaky ReLU.
struct ConvBlock {
  Conv3d conv;
  InstanceNorm norm;
  LeakyReLU act;

  ConvBlock() = default;
  ConvBlock(int in_ch, int out_ch, int kernel, int stride, float leaky_slope)
      : conv(in_ch, out_ch, kernel, stride) {
    act.slope = leaky_slope;
  }

  Tensor4 forward(const Tensor4& x, bool train) {
    return act.forward(norm.forward(conv.forward(x, train), train), train);
  }
  Tensor4 backward(const Tensor4& g) { return conv.backward(norm.backward(act.backward(g))); }
};

// Nearest-neighbor doubling along every spatial axis.
Tensor4 upsample_nearest2(const Tensor4& x);
Tensor4 upsample_nearest2_backward(const Tensor4& grad_out, Shape3 in_shape);

Tensor4 concat_channels(const Tensor4& a, const Tensor4& b);
// Splits a gradient back into the two concatenated parts (first `ca` channels).
std::pair<Tensor4, Tensor4> split_channels(const Tensor4& g, int ca);

void add_inplace(Tensor4& dst, const Tensor4& src);

Tensor4 sigmoid(const Tensor4& x);
// grad wrt pre-activation given the sigmoid output y.
Tensor4 sigmoid_backward(const Tensor4& grad_out, const Tensor4& y);

}  // namespace glioseg
