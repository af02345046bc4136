/* Copyright 2026 The rocdet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef ROC_NN_OPS_HPP_
#define ROC_NN_OPS_HPP_

#include <optional>

#include "roc/tensor.hpp"

namespace roc {

struct Conv2dGeometry {
  int stride_h = 1, stride_w = 1;
  int pad_h = 0, pad_w = 0;
  int groups = 1;
};

// Weights (Cout, Cin/groups, kh, kw), optional bias (Cout).
template <typename T>
struct Conv2dParams {
  Tensor<T> weight;
  std::optional<Tensor<T>> bias;
  Conv2dGeometry geom;
};

enum class Axis1d { kH = 2, kW = 3 };

// One 1-D kernel per channel, weights shaped (C, k), k odd. Same padding.
template <typename T>
struct DwConv1dParams {
  Tensor<T> weight;
  Axis1d axis = Axis1d::kW;
};

template <typename T>
struct GroupNormParams {
  int groups = 1;
  Tensor<T> gamma;
  Tensor<T> beta;
  double eps = 1e-5;
};

template <typename T>
struct BatchNormParams {
  Tensor<T> gamma, beta, mean, var;
  double eps = 1e-3;
};

// ---- forward ---------------------------------------------------------------

// Cross-correlation (no kernel flip).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>* bias, const Conv2dGeometry& g);

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Conv2dParams<T>& p) {
  return conv2d(x, p.weight, p.bias ? &*p.bias : nullptr, p.geom);
}

template <typename T>
Tensor<T> dwconv1d(const Tensor<T>& x, const Tensor<T>& weight, Axis1d axis);

template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& x, int k, int stride, int pad);

// Non-overlapping k×k average pooling (stride k, no padding, floor).
template <typename T>
Tensor<T> avgpool2d(const Tensor<T>& x, int k);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);

template <typename T>
Tensor<T> silu(const Tensor<T>& x);

template <typename T>
Tensor<T> softmax_lastdim(const Tensor<T>& x);

template <typename T>
Tensor<T> group_norm(const Tensor<T>& x, const Tensor<T>& gamma,
                     const Tensor<T>& beta, int groups, double eps);

template <typename T>
Tensor<T> batch_norm_infer(const Tensor<T>& x, const BatchNormParams<T>& p);

template <typename T>
Tensor<T> nearest_upsample(const Tensor<T>& x, int factor);

// (N, C, H, W) -> (N, C·s², H/s, W/s); output channel c·s² + i·s + j holds
// the element at row-in-block i, column-in-block j.
template <typename T>
Tensor<T> space_to_channel(const Tensor<T>& x, int s);

template <typename T>
Tensor<T> channel_to_space(const Tensor<T>& y, int s);

// Batched product of rank-3 operands (B, ·, ·), with optional transposes of
// the two trailing axes.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, bool trans_a,
                 bool trans_b);

// ---- backward --------------------------------------------------------------

template <typename T>
struct Conv2dGrads {
  Tensor<T> input, weight;
  std::optional<Tensor<T>> bias;
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight,
                               bool has_bias, const Conv2dGeometry& g,
                               const Tensor<T>& grad_out);

template <typename T>
std::pair<Tensor<T>, Tensor<T>> dwconv1d_backward(const Tensor<T>& x,
                                                  const Tensor<T>& weight,
                                                  Axis1d axis,
                                                  const Tensor<T>& grad_out);

// Gradient routed to the first maximal element (row-major window scan).
template <typename T>
Tensor<T> maxpool2d_backward(const Tensor<T>& x, int k, int stride, int pad,
                             const Tensor<T>& grad_out);

template <typename T>
Tensor<T> avgpool2d_backward(const Shape& x_shape, int k,
                             const Tensor<T>& grad_out);

template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& y, const Tensor<T>& grad_out);

template <typename T>
Tensor<T> silu_backward(const Tensor<T>& x, const Tensor<T>& grad_out);

template <typename T>
Tensor<T> softmax_lastdim_backward(const Tensor<T>& y,
                                   const Tensor<T>& grad_out);

template <typename T>
struct NormGrads {
  Tensor<T> input, gamma, beta;
};

template <typename T>
NormGrads<T> group_norm_backward(const Tensor<T>& x, const Tensor<T>& gamma,
                                 int groups, double eps,
                                 const Tensor<T>& grad_out);

template <typename T>
NormGrads<T> batch_norm_infer_backward(const Tensor<T>& x,
                                       const BatchNormParams<T>& p,
                                       const Tensor<T>& grad_out);

template <typename T>
Tensor<T> nearest_upsample_backward(const Shape& x_shape, int factor,
                                    const Tensor<T>& grad_out);

}  // namespace roc

#endif  // ROC_NN_OPS_HPP_
