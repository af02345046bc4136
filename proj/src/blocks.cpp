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

#include "roc/blocks.hpp"

#include <cmath>

namespace roc {

bool is_learnable_slot_name(const std::string& name) {
  auto ends_with = [&](const char* suffix) {
    const std::string s(suffix);
    return name.size() >= s.size() &&
           name.compare(name.size() - s.size(), s.size(), s) == 0;
  };
  return !ends_with(".running_mean") && !ends_with(".running_var");
}

void append_conv_slots(std::vector<SlotSpec>& slots, const std::string& prefix,
                       int64_t c_in, int64_t c_out, int k, int groups, bool bias) {
  slots.push_back({prefix + ".weight", Shape{c_out, c_in / groups, k, k},
                   SlotRole::kWeight});
  if (bias) slots.push_back({prefix + ".bias", Shape{c_out}, SlotRole::kBias});
}

void append_conv_block_slots(std::vector<SlotSpec>& slots, const std::string& prefix,
                             int64_t c_in, int64_t c_out, int k, bool fused) {
  append_conv_slots(slots, prefix + ".conv", c_in, c_out, k, 1, fused);
  if (fused) return;
  slots.push_back({prefix + ".bn.weight", Shape{c_out}, SlotRole::kNormScale});
  slots.push_back({prefix + ".bn.bias", Shape{c_out}, SlotRole::kNormShift});
  slots.push_back({prefix + ".bn.running_mean", Shape{c_out}, SlotRole::kRunningMean});
  slots.push_back({prefix + ".bn.running_var", Shape{c_out}, SlotRole::kRunningVar});
}

template <typename T>
TensorStore<T> init_slots(const std::vector<SlotSpec>& slots, InitMode mode,
                          uint64_t seed) {
  std::mt19937_64 rng(seed);
  TensorStore<T> store;
  for (const SlotSpec& s : slots) {
    Tensor<T> t(s.shape);
    if (mode == InitMode::kRandom) {
      switch (s.role) {
        case SlotRole::kWeight: {
          const int64_t fan_in = s.shape.numel() / s.shape[0];
          const double bound = 1.0 / std::sqrt(double(fan_in));
          for (auto& v : t.data()) v = T((2.0 * uniform01(rng) - 1.0) * bound);
          break;
        }
        case SlotRole::kNormScale:
        case SlotRole::kRunningVar:
          t = Tensor<T>(s.shape, T(1));
          break;
        default:
          break;
      }
    }
    store.set(s.name, std::move(t));
  }
  return store;
}

template TensorStore<float> init_slots(const std::vector<SlotSpec>&, InitMode, uint64_t);
template TensorStore<double> init_slots(const std::vector<SlotSpec>&, InitMode, uint64_t);

}  // namespace roc
