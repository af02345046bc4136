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

#ifndef ROC_BMS_SPPF_HPP_
#define ROC_BMS_SPPF_HPP_

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "roc/blocks.hpp"

namespace roc {

// BMS-SPPF: SPPF, then multi-scale spatial attention (MSSA) producing the
// directional gates A_h / A_w, then a channel gate a_c computed by a side
// branch (CAP condensation + multi-head self-attention). Output is
// X' ⊗ a_c, where X' = SPPF(x) ⊗ A_h ⊗ A_w.

struct MssaConfig {
  std::array<int, 4> kernels{3, 5, 7, 9};  // one per contiguous channel quarter
  int gate_groups = 4;                     // group norm before each sigmoid gate
};

enum class CapStrategy { kPool, kRecombine };

struct CapConfig {
  CapStrategy strategy = CapStrategy::kPool;
  int block = 2;        // s: s×s average pool, or s×s space-to-channel
  int norm_groups = 4;
};

struct MhsaConfig {
  int heads = 4;
  int qkv_groups = 0;  // 0 selects depthwise (groups = channels)
  bool qkv_bias = false;
};

struct BmsSppfConfig {
  int64_t c_in = 0;
  int64_t c_out = 0;
  int pool_kernel = 5;
  MssaConfig mssa;
  CapConfig cap;
  MhsaConfig mhsa;
  // Forces a_c ≡ 1, making the output equal to the MSSA output.
  bool bypass_channel_gate = false;

  int64_t hidden() const { return c_in / 2; }
  int64_t qkv_group_count() const {
    return mhsa.qkv_groups == 0 ? c_out : mhsa.qkv_groups;
  }
  // Throws kInvalidArgument naming the violated constraint.
  void validate() const;
};

const char* cap_strategy_name(CapStrategy s);
CapStrategy parse_cap_strategy(const std::string& s);

std::vector<SlotSpec> bms_sppf_slots(const BmsSppfConfig& cfg, const std::string& prefix);
std::vector<SlotSpec> sppf_slots(int64_t c_in, int64_t c_out, const std::string& prefix);

// ---- stages ----------------------------------------------------------------

template <class Ops>
typename Ops::Value sppf_forward(Ops& ops, const typename Ops::Value& x,
                                 int pool_kernel, const std::string& prefix) {
  using V = typename Ops::Value;
  const int pad = pool_kernel / 2;
  V x1 = conv_block(ops, x, prefix + ".cv1", 1, 1);
  V p1 = ops.maxpool2d(x1, pool_kernel, 1, pad);
  V p2 = ops.maxpool2d(p1, pool_kernel, 1, pad);
  V p3 = ops.maxpool2d(p2, pool_kernel, 1, pad);
  std::vector<V> parts{x1, p1, p2, p3};
  V cat = ops.concat(parts, 1);
  return conv_block(ops, cat, prefix + ".cv2", 1, 1);
}

template <class V>
struct MssaOutput {
  V x_prime;
  V a_h;  // (N, C, H, 1)
  V a_w;  // (N, C, 1, W)
};

namespace detail {

// Directional gate: per-quarter depthwise 1-D convs over the pooled profile,
// concatenated, group-normalised and squashed.
template <class Ops>
typename Ops::Value mssa_gate(Ops& ops, const typename Ops::Value& profile,
                              Axis1d axis, const MssaConfig& cfg,
                              const std::string& prefix) {
  using V = typename Ops::Value;
  const int64_t quarter = ops.shape(profile)[1] / 4;
  std::vector<V> parts;
  for (int g = 0; g < 4; ++g) {
    V part = ops.slice(profile, 1, g * quarter, quarter);
    parts.push_back(ops.dwconv1d(
        part, ops.param(prefix + ".dw." + std::to_string(g) + ".weight"), axis));
  }
  V cat = ops.concat(parts, 1);
  V norm = ops.group_norm(cat, ops.param(prefix + ".gn.weight"),
                          ops.param(prefix + ".gn.bias"), cfg.gate_groups,
                          kGroupNormEps);
  return ops.sigmoid(norm);
}

}  // namespace detail

template <class Ops>
MssaOutput<typename Ops::Value> mssa_forward(Ops& ops, const typename Ops::Value& x,
                                             const MssaConfig& cfg,
                                             const std::string& prefix) {
  using V = typename Ops::Value;
  const Shape& s = ops.shape(x);
  check(s.rank() == 4 && s[1] % 4 == 0, ErrorCode::kInvalidArgument,
        "mssa: channel count of " + s.str() + " must be divisible by 4");
  V x_h = ops.reduce_mean(x, 3, true);  // mean over W -> (N, C, H, 1)
  V x_w = ops.reduce_mean(x, 2, true);  // mean over H -> (N, C, 1, W)
  V a_h = detail::mssa_gate(ops, x_h, Axis1d::kH, cfg, prefix + ".h");
  V a_w = detail::mssa_gate(ops, x_w, Axis1d::kW, cfg, prefix + ".w");
  V x_prime = ops.mul(ops.mul(x, a_h), a_w);
  return {x_prime, a_h, a_w};
}

template <class Ops>
typename Ops::Value cap_forward(Ops& ops, const typename Ops::Value& x_prime,
                                const CapConfig& cfg, const std::string& prefix) {
  using V = typename Ops::Value;
  V y;
  if (cfg.strategy == CapStrategy::kPool) {
    y = ops.avgpool2d(x_prime, cfg.block);
  } else {
    V t = ops.space_to_channel(x_prime, cfg.block);
    y = ops.conv2d(t, ops.param(prefix + ".unify.weight"),
                   optional_param(ops, prefix + ".unify.bias"), Conv2dGeometry{});
  }
  return ops.group_norm(y, ops.param(prefix + ".gn.weight"),
                        ops.param(prefix + ".gn.bias"), cfg.norm_groups,
                        kGroupNormEps);
}

template <class V>
struct MhsaTrace {
  V attention;  // (N·h, L, L) row-stochastic
  V pooled;     // (N, C, 1) pre-gate mean over positions
};

// Channel gate a_c of shape (N, C, 1, 1).
template <class Ops>
typename Ops::Value mhsa_channel_forward(Ops& ops, const typename Ops::Value& y,
                                         const MhsaConfig& cfg,
                                         const std::string& prefix,
                                         MhsaTrace<typename Ops::Value>* trace = nullptr) {
  using V = typename Ops::Value;
  const Shape s = ops.shape(y);
  const int64_t N = s[0], C = s[1], L = s[2] * s[3];
  check(cfg.heads >= 1 && C % cfg.heads == 0, ErrorCode::kInvalidArgument,
        "mhsa: channels " + std::to_string(C) + " not divisible by " +
            std::to_string(cfg.heads) + " heads");
  const int64_t h = cfg.heads, d = C / h;
  Conv2dGeometry g;
  g.groups = int(cfg.qkv_groups == 0 ? C : cfg.qkv_groups);
  auto project = [&](const char* which) {
    const std::string p = prefix + "." + which;
    V out = ops.conv2d(y, ops.param(p + ".weight"), optional_param(ops, p + ".bias"), g);
    return ops.reshape(out, Shape{N * h, d, L});
  };
  V q = project("q");
  V k = project("k");
  V v = project("v");
  V logits = ops.scale(ops.matmul(q, k, true, false),
                       typename Ops::Scalar(1.0 / std::sqrt(double(d))));
  V attn = ops.softmax_lastdim(logits);   // (N·h, L, L)
  V out = ops.matmul(v, attn, false, true);  // (N·h, d, L)
  V merged = ops.reshape(out, Shape{N, C, L});
  V pooled = ops.reduce_mean(merged, 2, true);
  if (trace) *trace = {attn, pooled};
  return ops.sigmoid(ops.reshape(pooled, Shape{N, C, 1, 1}));
}

template <class V>
struct BmsTrace {
  V sppf, x_prime, a_h, a_w, y_norm, a_c;
  MhsaTrace<V> mhsa;
};

template <class Ops>
typename Ops::Value bms_sppf_forward(Ops& ops, const typename Ops::Value& x,
                                     const BmsSppfConfig& cfg, const std::string& prefix,
                                     BmsTrace<typename Ops::Value>* trace = nullptr) {
  using V = typename Ops::Value;
  V s = sppf_forward(ops, x, cfg.pool_kernel, prefix + ".sppf");
  MssaOutput<V> m = mssa_forward(ops, s, cfg.mssa, prefix + ".mssa");
  if (trace) {
    trace->sppf = s;
    trace->x_prime = m.x_prime;
    trace->a_h = m.a_h;
    trace->a_w = m.a_w;
  }
  if (cfg.bypass_channel_gate) return m.x_prime;
  V y = cap_forward(ops, m.x_prime, cfg.cap, prefix + ".cap");
  V a_c = mhsa_channel_forward(ops, y, cfg.mhsa, prefix + ".mhsa",
                               trace ? &trace->mhsa : nullptr);
  if (trace) {
    trace->y_norm = y;
    trace->a_c = a_c;
  }
  return ops.mul(m.x_prime, a_c);
}

}  // namespace roc

#endif  // ROC_BMS_SPPF_HPP_
