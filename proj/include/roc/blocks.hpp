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

#ifndef ROC_BLOCKS_HPP_
#define ROC_BLOCKS_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "roc/nn_ops.hpp"
#include "roc/tensor_store.hpp"

namespace roc {

inline constexpr double kBatchNormEps = 1e-3;
inline constexpr double kGroupNormEps = 1e-5;

enum class SlotRole {
  kWeight,       // convolution / projection weight, fan-in initialised
  kBias,
  kNormScale,    // gamma, initialised to 1
  kNormShift,    // beta, initialised to 0
  kRunningMean,  // inference statistics, not learnable
  kRunningVar,
};

struct SlotSpec {
  std::string name;
  Shape shape;
  SlotRole role = SlotRole::kWeight;

  bool learnable() const {
    return role != SlotRole::kRunningMean && role != SlotRole::kRunningVar;
  }
};

bool is_learnable_slot_name(const std::string& name);

// Conv (no bias) + BN + SiLU. With `fused`, a conv bias replaces the BN.
void append_conv_block_slots(std::vector<SlotSpec>& slots, const std::string& prefix,
                             int64_t c_in, int64_t c_out, int k, bool fused = false);

void append_conv_slots(std::vector<SlotSpec>& slots, const std::string& prefix,
                       int64_t c_in, int64_t c_out, int k, int groups, bool bias);

enum class InitMode { kRandom, kZero };

// Deterministic initialisation: weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)),
// norm scales 1, shifts and biases 0, running mean 0, running var 1.
// kZero sets every slot to 0.
template <typename T>
TensorStore<T> init_slots(const std::vector<SlotSpec>& slots, InitMode mode,
                          uint64_t seed);

// Uniform double in [0, 1) from a 64-bit engine, independent of the
// standard library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

template <class Ops>
std::optional<typename Ops::Value> optional_param(Ops& ops, const std::string& name) {
  if (!ops.has(name)) return std::nullopt;
  return ops.param(name);
}

// Conv block: conv -> (BN) -> SiLU. BN is applied when its slots exist, so a
// folded store (conv bias, no BN) runs through the same code.
template <class Ops>
typename Ops::Value conv_block(Ops& ops, const typename Ops::Value& x,
                               const std::string& prefix, int k, int stride,
                               bool activate = true) {
  Conv2dGeometry g;
  g.stride_h = g.stride_w = stride;
  g.pad_h = g.pad_w = k / 2;
  auto y = ops.conv2d(x, ops.param(prefix + ".conv.weight"),
                      optional_param(ops, prefix + ".conv.bias"), g);
  if (ops.has(prefix + ".bn.weight")) {
    y = ops.batch_norm(y, ops.param(prefix + ".bn.weight"),
                       ops.param(prefix + ".bn.bias"),
                       ops.param(prefix + ".bn.running_mean"),
                       ops.param(prefix + ".bn.running_var"), kBatchNormEps);
  }
  return activate ? ops.silu(y) : y;
}

}  // namespace roc

#endif  // ROC_BLOCKS_HPP_
