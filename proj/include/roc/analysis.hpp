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

#ifndef ROC_ANALYSIS_HPP_
#define ROC_ANALYSIS_HPP_

#include <string>
#include <vector>

#include "roc/model.hpp"

namespace roc {

// Bytes added to 2·params (f16) or 4·params (f32) for container metadata.
inline constexpr int64_t kSerializedOverheadBytes = 250'000;

struct NodeCost {
  std::string name;
  std::string kind;
  int64_t c_in = 0;
  int64_t c_out = 0;
  int repeats = 0;
  int64_t params = 0;
  int64_t flops = 0;
};

struct CostReport {
  std::string label;
  int64_t image_h = 640;
  int64_t image_w = 640;
  int64_t params = 0;  // learnable elements; BN running statistics excluded
  int64_t flops = 0;   // 2 × multiply-accumulates, batch 1
  int64_t size_bytes_f16 = 0;
  int64_t size_bytes_f32 = 0;
  std::vector<NodeCost> nodes;
};

// Closed-form counts. `image_h/w` must be divisible by 32.
CostReport analyze(const ModelGraph& g, int64_t image_h = 640, int64_t image_w = 640);
int64_t count_params(const ModelGraph& g);
int64_t count_flops(const ModelGraph& g, int64_t image_h, int64_t image_w);

struct SizeEstimate {
  int64_t f16 = 0;
  int64_t f32 = 0;
};
SizeEstimate estimate_size(int64_t params);

// Reductions in percent: (ref − new) / ref · 100.
struct CostDiff {
  double params_pct = 0;
  double flops_pct = 0;
  double size_f16_pct = 0;
  // Same, computed after rounding operands the way results tables print
  // them (params to 0.01 M, GFLOPs to 0.1).
  double params_pct_table = 0;
  double flops_pct_table = 0;
};
CostDiff diff_reports(const CostReport& ref, const CostReport& candidate);

// Per-block closed forms, exposed for testing.
int64_t conv_block_params(int64_t c_in, int64_t c_out, int k);
int64_t conv_block_flops(int64_t c_in, int64_t c_out, int k, int64_t out_hw);
NodeCost bms_sppf_cost(const BmsSppfConfig& cfg, int64_t h, int64_t w);

std::string format_report_text(const CostReport& r);
std::string format_report_kv(const CostReport& r);
std::string format_diff_text(const CostReport& ref, const CostReport& cand, const CostDiff& d);
std::string format_diff_kv(const CostDiff& d);

}  // namespace roc

#endif  // ROC_ANALYSIS_HPP_
