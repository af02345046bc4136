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

#ifndef ROC_MODEL_HPP_
#define ROC_MODEL_HPP_

#include <array>
#include <string>
#include <vector>

#include "roc/bms_sppf.hpp"

namespace roc {

// Width/depth multipliers applied to nominal block sizes.
struct ScalePolicy {
  double depth = 1.0 / 3.0;
  double width = 0.25;
  int64_t max_channels = 1024;  // cap on nominal widths before the multiplier
  int64_t divisor = 8;          // effective widths round up to a multiple of this

  void validate() const;
};

// Nominal-width ladder and block repeats. The template's widest nominal
// channel count is 1024; `nominal_max_channels` rescales every backbone
// width proportionally (1024 -> 512 halves all of them).
struct CompressionPolicy {
  std::string name = "baseline";
  int64_t nominal_max_channels = 1024;
  std::array<int, 4> backbone_repeats{3, 6, 6, 3};  // C2f at P2..P5
  int head_repeats = 3;
  std::array<int64_t, 3> head_channels{256, 512, 1024};  // P3, P4, P5 outputs
  bool bms_sppf = false;  // replace SPPF with BMS-SPPF

  void validate() const;
};

CompressionPolicy baseline_policy();
CompressionPolicy roc_policy(int64_t nominal_max_channels = 512);
// Alternate repeat pattern: 2 at P3/P4, 3 elsewhere.
CompressionPolicy roc_eq10_policy();

struct ModelConfig {
  ScalePolicy scale;
  CompressionPolicy compression;
  BmsSppfConfig bms;  // channel fields are filled in by build_graph
  int nc = 4;
  int reg_max = 16;
};

enum class BlockKind { kConv, kC2f, kSppf, kBmsSppf, kUpsample, kConcat, kDetect };

const char* block_kind_name(BlockKind k);

struct BlockSpec {
  BlockKind kind = BlockKind::kConv;
  std::string name;            // slot prefix, e.g. "backbone.4"
  std::vector<int> inputs;     // producer node ids; -1 is the image
  std::vector<int64_t> in_channels;
  int64_t c_out = 0;
  int repeats = 1;
  bool shortcut = false;
  int kernel = 1;
  int stride = 1;
  int feature_stride = 1;      // output resolution relative to the image
  BmsSppfConfig bms;           // kBmsSppf only

  int64_t c_in() const { return in_channels.empty() ? 0 : in_channels[0]; }
};

struct ModelGraph {
  ModelConfig config;
  std::vector<BlockSpec> nodes;
  std::array<int, 3> strides{8, 16, 32};

  int nc() const { return config.nc; }
  int reg_max() const { return config.reg_max; }
  int64_t head_channels_per_level() const { return 4 * int64_t(config.reg_max) + config.nc; }
  const BlockSpec& detect() const { return nodes.back(); }
};

int64_t effective_channels(const ScalePolicy& s, double nominal);
int effective_repeats(const ScalePolicy& s, int nominal);

ModelGraph build_graph(const ModelConfig& cfg);
ModelGraph build_baseline(int nc = 4);
// Rebuilds `tmpl` with the policy's widths and repeats and swaps SPPF for
// BMS-SPPF. Node count is unchanged.
ModelGraph apply_compression(const ModelGraph& tmpl, const CompressionPolicy& policy);

// Acyclic, channel-consistent, exactly one Detect fed at strides 8/16/32.
void validate_graph(const ModelGraph& g);

// Every weight slot, in a stable order. `fused` lists conv biases in place
// of batch-norm slots.
std::vector<SlotSpec> model_slots(const ModelGraph& g, bool fused = false);

WeightStore init_weights(const ModelGraph& g, InitMode mode, uint64_t seed);

// Verifies each slot exists with the right shape. Conv blocks may be in
// folded form (conv bias instead of BN).
void check_weights(const ModelGraph& g, const WeightStore& w);

// Image NCHW with H, W divisible by 32. Returns one raw map per stride,
// each (N, 4·reg_max + nc, H/s, W/s).
std::vector<TensorF> forward(const ModelGraph& g, const WeightStore& w,
                             const TensorF& image);

// Merges every conv+BN pair into conv-with-bias. Idempotent.
WeightStore fold_batchnorm(const ModelGraph& g, const WeightStore& w);

// ---- generic block bodies ------------------------------------------------

template <class Ops>
typename Ops::Value c2f_forward(Ops& ops, const typename Ops::Value& x,
                                const BlockSpec& b) {
  using V = typename Ops::Value;
  const int64_t c = b.c_out / 2;
  V y = conv_block(ops, x, b.name + ".cv1", 1, 1);
  std::vector<V> outs{ops.slice(y, 1, 0, c), ops.slice(y, 1, c, c)};
  V cur = outs.back();
  for (int j = 0; j < b.repeats; ++j) {
    const std::string p = b.name + ".m." + std::to_string(j);
    V t = conv_block(ops, cur, p + ".cv1", 3, 1);
    t = conv_block(ops, t, p + ".cv2", 3, 1);
    if (b.shortcut) t = ops.add(cur, t);
    outs.push_back(t);
    cur = t;
  }
  return conv_block(ops, ops.concat(outs, 1), b.name + ".cv2", 1, 1);
}

template <class Ops>
typename Ops::Value detect_level_forward(Ops& ops, const typename Ops::Value& x,
                                         const std::string& prefix, int level) {
  using V = typename Ops::Value;
  auto branch = [&](const std::string& head) {
    const std::string p = prefix + "." + head + "." + std::to_string(level);
    V t = conv_block(ops, x, p + ".0", 3, 1);
    t = conv_block(ops, t, p + ".1", 3, 1);
    return ops.conv2d(t, ops.param(p + ".2.weight"), optional_param(ops, p + ".2.bias"),
                      Conv2dGeometry{});
  };
  std::vector<V> parts{branch("cv2"), branch("cv3")};
  return ops.concat(parts, 1);
}

template <class Ops>
std::vector<typename Ops::Value> model_forward(Ops& ops, const ModelGraph& g,
                                               const typename Ops::Value& image) {
  using V = typename Ops::Value;
  std::vector<V> outs(g.nodes.size());
  auto input = [&](const BlockSpec& b, size_t i) -> const V& {
    const int id = b.inputs[i];
    return id < 0 ? image : outs[size_t(id)];
  };
  std::vector<V> heads;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const BlockSpec& b = g.nodes[i];
    switch (b.kind) {
      case BlockKind::kConv:
        outs[i] = conv_block(ops, input(b, 0), b.name, b.kernel, b.stride);
        break;
      case BlockKind::kC2f:
        outs[i] = c2f_forward(ops, input(b, 0), b);
        break;
      case BlockKind::kSppf:
        outs[i] = sppf_forward(ops, input(b, 0), 5, b.name);
        break;
      case BlockKind::kBmsSppf:
        outs[i] = bms_sppf_forward(ops, input(b, 0), b.bms, b.name);
        break;
      case BlockKind::kUpsample:
        outs[i] = ops.upsample(input(b, 0), 2);
        break;
      case BlockKind::kConcat: {
        std::vector<V> parts;
        for (size_t k = 0; k < b.inputs.size(); ++k) parts.push_back(input(b, k));
        outs[i] = ops.concat(parts, 1);
        break;
      }
      case BlockKind::kDetect:
        for (size_t k = 0; k < b.inputs.size(); ++k)
          heads.push_back(detect_level_forward(ops, input(b, k), b.name, int(k)));
        break;
    }
  }
  return heads;
}

}  // namespace roc

#endif  // ROC_MODEL_HPP_
