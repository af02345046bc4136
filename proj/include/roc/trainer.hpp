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

#ifndef ROC_TRAINER_HPP_
#define ROC_TRAINER_HPP_

#include <optional>
#include <string>
#include <vector>

#include "roc/autograd.hpp"
#include "roc/bms_sppf.hpp"

namespace roc {

// ---- gradient checking -------------------------------------------------------

enum class GradTarget { kMssa, kCap, kMhsa, kBms, kLoss };

const char* grad_target_name(GradTarget t);
GradTarget parse_grad_target(const std::string& s);

struct GradcheckOptions {
  uint64_t seed = 0;
  double step = 1e-6;
  double tolerance = 1e-5;
  std::optional<OpKind> corrupt;  // negative control: flip this op's gradients
};

// Relative error of one parameter tensor's gradient:
// max|analytic − numeric| / max(max|analytic|, max|numeric|).
struct ParamCheck {
  std::string name;
  int64_t elements = 0;
  double max_rel_err = 0;
  double max_abs_diff = 0;
  double max_abs_grad = 0;
  double max_abs_numeric = 0;
  int64_t zero_grads = 0;  // elements whose analytic gradient is exactly 0
};

struct GradcheckReport {
  std::string target;
  double step = 0;
  double tolerance = 0;
  std::vector<ParamCheck> params;
  double max_rel_err = 0;
  bool passed = false;
  // Every learnable tensor received a nonzero gradient somewhere.
  bool all_params_nonzero = false;
};

GradcheckReport gradcheck(GradTarget target, const GradcheckOptions& opt = {});
std::string format_gradcheck(const GradcheckReport& r);

// ---- toy overfit -------------------------------------------------------------

struct ToySample {
  TensorD input;  // (1, 1, H, W)
  double target = 0;
};

// Four vertical-line and four horizontal-line images (label 1 and 0).
std::vector<ToySample> make_toy_dataset(uint64_t seed, int64_t size = 16);

struct ToyOptions {
  int steps = 500;
  double lr = 0.01;
  double momentum = 0.937;
  uint64_t seed = 0;
  int64_t image_size = 16;
  int64_t channels = 16;
  CapStrategy cap = CapStrategy::kPool;
  // Slots whose name contains one of these are never updated.
  std::vector<std::string> frozen;
  // Zero every slot whose name contains one of these before training.
  std::vector<std::string> zeroed;
};

struct ToyResult {
  std::vector<double> losses;  // loss before each update
  double initial = 0;
  double final_loss = 0;
  double reduction = 0;        // 1 − final / initial
  int diverged_step = -1;      // first step with a non-finite loss
  bool smoothed_monotone = false;
  double accuracy = 0;         // on the training set, after the last step
  TensorStore<double> params;
};

ToyResult overfit_toy(const ToyOptions& opt = {});

BmsSppfConfig toy_bms_config(const ToyOptions& opt);
std::vector<SlotSpec> toy_slots(const ToyOptions& opt);

// Forward pass of the toy net on a stacked batch (N, 1, H, W); returns
// logits (N, 1, 1, 1).
template <class Ops>
typename Ops::Value toy_forward(Ops& ops, const typename Ops::Value& x,
                                const BmsSppfConfig& bms,
                                BmsTrace<typename Ops::Value>* trace = nullptr) {
  Conv2dGeometry pad1;
  pad1.pad_h = pad1.pad_w = 1;
  auto h = ops.silu(ops.conv2d(x, ops.param("stem.weight"), ops.param("stem.bias"), pad1));
  h = bms_sppf_forward(ops, h, bms, "bms", trace);
  h = ops.reduce_mean(ops.reduce_mean(h, 3, true), 2, true);
  return ops.conv2d(h, ops.param("head.weight"), ops.param("head.bias"), Conv2dGeometry{});
}

// Mean of a trailing window; used for the smoothed-monotonicity check.
std::vector<double> moving_average(const std::vector<double>& v, size_t window);
std::string format_trace(const std::vector<double>& losses);

}  // namespace roc

#endif  // ROC_TRAINER_HPP_
