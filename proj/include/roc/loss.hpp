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

#ifndef ROC_LOSS_HPP_
#define ROC_LOSS_HPP_

#include "roc/tensor.hpp"

namespace roc {

struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool valid() const { return x2 >= x1 && y2 >= y1; }
};

inline constexpr double kCiouEps = 1e-7;

// Zero-area boxes score 0 against anything, including themselves.
double iou(const BBox& a, const BBox& b);

struct BoxGrad {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

struct CiouResult {
  double loss = 0;
  double iou = 0;
  double center_term = 0;  // ρ² / c²
  double v = 0;
  double alpha = 0;
  BoxGrad grad;  // d loss / d pred with alpha held constant
};

CiouResult ciou_loss(const BBox& pred, const BBox& target);

// Same loss with a caller-supplied alpha; used to check the frozen-alpha
// gradient against finite differences.
double ciou_loss_fixed_alpha(const BBox& pred, const BBox& target, double alpha);

template <typename T>
struct BceResult {
  double loss = 0;
  Tensor<T> grad;  // d mean-loss / d logits
};

// Mean binary cross-entropy over all elements, stable for large |z|.
template <typename T>
BceResult<T> bce_loss(const Tensor<T>& logits, const Tensor<T>& targets);

struct LossWeights {
  double cls = 0.5;
  double loc = 7.5;
  double obj = 0.0;

  void validate() const;
};

struct LossComponents {
  double cls = 0;
  double loc = 0;
  double obj = 0;
};

struct TotalLoss {
  double value = 0;
  // d total / d component, i.e. the weights themselves.
  LossComponents grad;
};

TotalLoss total_loss(const LossComponents& c, const LossWeights& w);

}  // namespace roc

#endif  // ROC_LOSS_HPP_
