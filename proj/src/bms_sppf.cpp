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

#include "roc/bms_sppf.hpp"

namespace roc {

const char* cap_strategy_name(CapStrategy s) {
  return s == CapStrategy::kPool ? "pool" : "recombine";
}

CapStrategy parse_cap_strategy(const std::string& s) {
  if (s == "pool") return CapStrategy::kPool;
  if (s == "recombine") return CapStrategy::kRecombine;
  fail(ErrorCode::kInvalidArgument,
       "unknown CAP strategy '" + s + "' (expected pool or recombine)");
}

void BmsSppfConfig::validate() const {
  auto bad = [](const std::string& what) {
    fail(ErrorCode::kInvalidArgument, "bms_sppf: " + what);
  };
  const std::string co = std::to_string(c_out);
  if (c_in < 2 || c_in % 2 != 0) bad("input channels must be even and >= 2");
  if (c_out < 4 || c_out % 4 != 0) bad("output channels " + co + " not divisible by 4");
  if (pool_kernel < 1 || pool_kernel % 2 == 0) bad("pool kernel must be odd");
  for (size_t i = 0; i < mssa.kernels.size(); ++i) {
    if (mssa.kernels[i] < 1 || mssa.kernels[i] % 2 == 0) bad("MSSA kernels must be odd");
    if (i > 0 && mssa.kernels[i] <= mssa.kernels[i - 1])
      bad("MSSA kernels must be strictly increasing");
  }
  if (mssa.gate_groups < 1 || c_out % mssa.gate_groups != 0)
    bad("channels " + co + " not divisible by gate groups " +
        std::to_string(mssa.gate_groups));
  if (cap.block < 1) bad("CAP block size must be positive");
  if (cap.norm_groups < 1 || c_out % cap.norm_groups != 0)
    bad("channels " + co + " not divisible by CAP norm groups " +
        std::to_string(cap.norm_groups));
  if (mhsa.heads < 1 || c_out % mhsa.heads != 0)
    bad("channels " + co + " not divisible by heads " + std::to_string(mhsa.heads));
  const int64_t g = qkv_group_count();
  if (g < 1 || c_out % g != 0)
    bad("channels " + co + " not divisible by Q/K/V groups " + std::to_string(g));
}

std::vector<SlotSpec> sppf_slots(int64_t c_in, int64_t c_out, const std::string& prefix) {
  std::vector<SlotSpec> slots;
  const int64_t hidden = c_in / 2;
  append_conv_block_slots(slots, prefix + ".cv1", c_in, hidden, 1);
  append_conv_block_slots(slots, prefix + ".cv2", hidden * 4, c_out, 1);
  return slots;
}

std::vector<SlotSpec> bms_sppf_slots(const BmsSppfConfig& cfg, const std::string& prefix) {
  cfg.validate();
  std::vector<SlotSpec> slots = sppf_slots(cfg.c_in, cfg.c_out, prefix + ".sppf");
  const int64_t C = cfg.c_out;
  for (const char* dir : {"h", "w"}) {
    const std::string p = prefix + ".mssa." + dir;
    for (int g = 0; g < 4; ++g)
      slots.push_back({p + ".dw." + std::to_string(g) + ".weight",
                       Shape{C / 4, cfg.mssa.kernels[size_t(g)]}, SlotRole::kWeight});
    slots.push_back({p + ".gn.weight", Shape{C}, SlotRole::kNormScale});
    slots.push_back({p + ".gn.bias", Shape{C}, SlotRole::kNormShift});
  }
  const std::string cap = prefix + ".cap";
  if (cfg.cap.strategy == CapStrategy::kRecombine) {
    const int64_t s2 = int64_t(cfg.cap.block) * cfg.cap.block;
    append_conv_slots(slots, cap + ".unify", C * s2, C, 1, 1, false);
  }
  slots.push_back({cap + ".gn.weight", Shape{C}, SlotRole::kNormScale});
  slots.push_back({cap + ".gn.bias", Shape{C}, SlotRole::kNormShift});
  const int groups = int(cfg.qkv_group_count());
  for (const char* which : {"q", "k", "v"})
    append_conv_slots(slots, prefix + ".mhsa." + which, C, C, 1, groups,
                      cfg.mhsa.qkv_bias);
  return slots;
}

}  // namespace roc
