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

#include "roc/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "roc/autograd.hpp"

namespace roc {

namespace {

constexpr double kTemplateMaxChannels = 1024.0;

void bad_config(const std::string& msg) { fail(ErrorCode::kInvalidArgument, msg); }

}  // namespace

void ScalePolicy::validate() const {
  if (!(depth > 0.0 && depth <= 1.0) || !(width > 0.0 && width <= 1.0))
    bad_config("scale multipliers must lie in (0, 1]");
  if (max_channels < 1) bad_config("max_channels must be positive");
  if (divisor < 1) bad_config("channel divisor must be positive");
}

void CompressionPolicy::validate() const {
  if (nominal_max_channels < 8) bad_config("nominal_max_channels must be at least 8");
  for (int r : backbone_repeats)
    if (r < 1) bad_config("backbone repeats must be positive");
  if (head_repeats < 1) bad_config("head repeats must be positive");
  for (int64_t c : head_channels)
    if (c < 1) bad_config("head channels must be positive");
}

CompressionPolicy baseline_policy() { return CompressionPolicy{}; }

CompressionPolicy roc_policy(int64_t nominal_max_channels) {
  CompressionPolicy p;
  p.name = "roc";
  p.nominal_max_channels = nominal_max_channels;
  p.backbone_repeats = {2, 3, 3, 2};
  p.head_repeats = 2;
  const int64_t base = nominal_max_channels / 4;
  p.head_channels = {base, base * 2, base * 4};
  p.bms_sppf = true;
  return p;
}

CompressionPolicy roc_eq10_policy() {
  CompressionPolicy p = roc_policy(512);
  p.name = "roc_eq10";
  p.backbone_repeats = {3, 2, 2, 3};
  return p;
}

const char* block_kind_name(BlockKind k) {
  switch (k) {
    case BlockKind::kConv: return "Conv";
    case BlockKind::kC2f: return "C2f";
    case BlockKind::kSppf: return "SPPF";
    case BlockKind::kBmsSppf: return "BMS_SPPF";
    case BlockKind::kUpsample: return "Upsample";
    case BlockKind::kConcat: return "Concat";
    case BlockKind::kDetect: return "Detect";
  }
  return "?";
}

int64_t effective_channels(const ScalePolicy& s, double nominal) {
  const double capped = std::min(nominal, double(s.max_channels)) * s.width;
  const auto d = double(s.divisor);
  const auto c = int64_t(std::ceil(capped / d - 1e-9) * d);
  return std::max(c, s.divisor);
}

int effective_repeats(const ScalePolicy& s, int nominal) {
  return std::max(1, int(std::ceil(nominal * s.depth - 1e-9)));
}

ModelGraph build_graph(const ModelConfig& cfg) {
  cfg.scale.validate();
  cfg.compression.validate();
  if (cfg.nc < 1) bad_config("class count must be positive");
  if (cfg.reg_max < 1) bad_config("reg_max must be positive");

  ModelGraph g;
  g.config = cfg;
  const ScalePolicy& s = cfg.scale;
  const CompressionPolicy& p = cfg.compression;
  const double ratio = double(p.nominal_max_channels) / kTemplateMaxChannels;
  auto bb = [&](double nominal) { return effective_channels(s, nominal * ratio); };
  auto hd = [&](int level) { return effective_channels(s, double(p.head_channels[size_t(level)])); };
  auto reps = [&](int n) { return effective_repeats(s, n); };

  auto& nodes = g.nodes;
  auto out = [&](int id) { return nodes[size_t(id)].c_out; };
  auto stride_of = [&](int id) { return id < 0 ? 1 : nodes[size_t(id)].feature_stride; };
  auto label = [](size_t id) {
    return (id <= 9 ? "backbone." : id <= 21 ? "neck." : "head.") + std::to_string(id);
  };
  auto conv = [&](int64_t c, int k, int st) {
    const int in = int(nodes.size()) - 1;
    BlockSpec b;
    b.kind = BlockKind::kConv;
    b.inputs = {in};
    b.in_channels = {in < 0 ? 3 : out(in)};
    b.c_out = c;
    b.kernel = k;
    b.stride = st;
    b.feature_stride = stride_of(in) * st;
    nodes.push_back(b);
  };
  auto c2f = [&](int64_t c, int n, bool shortcut) {
    const int in = int(nodes.size()) - 1;
    BlockSpec b;
    b.kind = BlockKind::kC2f;
    b.inputs = {in};
    b.in_channels = {out(in)};
    b.c_out = c;
    b.repeats = n;
    b.shortcut = shortcut;
    b.feature_stride = stride_of(in);
    nodes.push_back(b);
  };
  auto upsample = [&] {
    const int in = int(nodes.size()) - 1;
    BlockSpec b;
    b.kind = BlockKind::kUpsample;
    b.inputs = {in};
    b.in_channels = {out(in)};
    b.c_out = out(in);
    b.feature_stride = stride_of(in) / 2;
    nodes.push_back(b);
  };
  auto concat = [&](int other) {
    const int in = int(nodes.size()) - 1;
    BlockSpec b;
    b.kind = BlockKind::kConcat;
    b.inputs = {in, other};
    b.in_channels = {out(in), out(other)};
    b.c_out = out(in) + out(other);
    b.feature_stride = stride_of(in);
    nodes.push_back(b);
  };

  conv(bb(64), 3, 2);                          // 0  P1/2
  conv(bb(128), 3, 2);                         // 1  P2/4
  c2f(bb(128), reps(p.backbone_repeats[0]), true);
  conv(bb(256), 3, 2);                         // 3  P3/8
  c2f(bb(256), reps(p.backbone_repeats[1]), true);
  conv(bb(512), 3, 2);                         // 5  P4/16
  c2f(bb(512), reps(p.backbone_repeats[2]), true);
  conv(bb(1024), 3, 2);                        // 7  P5/32
  c2f(bb(1024), reps(p.backbone_repeats[3]), true);
  {
    BlockSpec b;
    b.inputs = {8};
    b.in_channels = {out(8)};
    b.c_out = bb(1024);
    b.feature_stride = stride_of(8);
    if (p.bms_sppf) {
      b.kind = BlockKind::kBmsSppf;
      b.bms = cfg.bms;
      b.bms.c_in = b.c_in();
      b.bms.c_out = b.c_out;
      b.bms.validate();
    } else {
      b.kind = BlockKind::kSppf;
    }
    nodes.push_back(b);  // 9
  }
  const int hn = reps(p.head_repeats);
  upsample();                                  // 10
  concat(6);                                   // 11
  c2f(hd(1), hn, false);                       // 12
  upsample();                                  // 13
  concat(4);                                   // 14
  c2f(hd(0), hn, false);                       // 15  P3 out
  conv(hd(0), 3, 2);                           // 16
  concat(12);                                  // 17
  c2f(hd(1), hn, false);                       // 18  P4 out
  conv(hd(1), 3, 2);                           // 19
  concat(9);                                   // 20
  c2f(hd(2), hn, false);                       // 21  P5 out
  {
    BlockSpec b;
    b.kind = BlockKind::kDetect;
    b.inputs = {15, 18, 21};
    b.in_channels = {out(15), out(18), out(21)};
    b.c_out = g.head_channels_per_level();
    nodes.push_back(b);  // 22
  }
  for (size_t i = 0; i < nodes.size(); ++i) nodes[i].name = label(i);
  validate_graph(g);
  return g;
}

ModelGraph build_baseline(int nc) {
  ModelConfig cfg;
  cfg.nc = nc;
  return build_graph(cfg);
}

ModelGraph apply_compression(const ModelGraph& tmpl, const CompressionPolicy& policy) {
  ModelConfig cfg = tmpl.config;
  cfg.compression = policy;
  cfg.compression.bms_sppf = true;
  return build_graph(cfg);
}

void validate_graph(const ModelGraph& g) {
  auto bad = [](const std::string& m) { fail(ErrorCode::kInvalidArgument, "graph: " + m); };
  int detects = 0;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const BlockSpec& b = g.nodes[i];
    const std::string where = b.name.empty() ? "node " + std::to_string(i) : b.name;
    if (b.inputs.empty()) bad(where + " has no inputs");
    if (b.inputs.size() != b.in_channels.size()) bad(where + " input arity mismatch");
    for (size_t k = 0; k < b.inputs.size(); ++k) {
      const int id = b.inputs[k];
      if (id >= int(i)) bad(where + " consumes a later node (cycle)");
      const int64_t produced = id < 0 ? 3 : g.nodes[size_t(id)].c_out;
      if (produced != b.in_channels[k])
        bad(where + " expects " + std::to_string(b.in_channels[k]) +
            " input channels, producer gives " + std::to_string(produced));
    }
    if (b.c_out < 1) bad(where + " has no output channels");
    switch (b.kind) {
      case BlockKind::kConcat: {
        int64_t sum = 0;
        const int st = g.nodes[size_t(b.inputs[0])].feature_stride;
        for (size_t k = 0; k < b.inputs.size(); ++k) {
          sum += b.in_channels[k];
          if (g.nodes[size_t(b.inputs[k])].feature_stride != st)
            bad(where + " joins maps of different resolution");
        }
        if (sum != b.c_out) bad(where + " output channels differ from input sum");
        break;
      }
      case BlockKind::kC2f:
        if (b.c_out % 2 != 0) bad(where + " needs an even channel count");
        break;
      case BlockKind::kBmsSppf:
        b.bms.validate();
        if (b.bms.c_in != b.c_in() || b.bms.c_out != b.c_out)
          bad(where + " attention config channels disagree with node");
        break;
      case BlockKind::kDetect: {
        ++detects;
        if (i + 1 != g.nodes.size()) bad("Detect must be the final node");
        if (b.inputs.size() != 3) bad("Detect needs three inputs");
        for (size_t k = 0; k < 3; ++k)
          if (g.nodes[size_t(b.inputs[k])].feature_stride != g.strides[k])
            bad("Detect input " + std::to_string(k) + " is at stride " +
                std::to_string(g.nodes[size_t(b.inputs[k])].feature_stride) +
                ", expected " + std::to_string(g.strides[k]));
        break;
      }
      default:
        break;
    }
  }
  if (detects != 1) bad("expected exactly one Detect node, found " + std::to_string(detects));
}

namespace {

void append_block_slots(std::vector<SlotSpec>& slots, const ModelGraph& g,
                        const BlockSpec& b, bool fused) {
  switch (b.kind) {
    case BlockKind::kConv:
      append_conv_block_slots(slots, b.name, b.c_in(), b.c_out, b.kernel, fused);
      break;
    case BlockKind::kC2f: {
      const int64_t c = b.c_out / 2;
      append_conv_block_slots(slots, b.name + ".cv1", b.c_in(), 2 * c, 1, fused);
      for (int j = 0; j < b.repeats; ++j) {
        const std::string p = b.name + ".m." + std::to_string(j);
        append_conv_block_slots(slots, p + ".cv1", c, c, 3, fused);
        append_conv_block_slots(slots, p + ".cv2", c, c, 3, fused);
      }
      append_conv_block_slots(slots, b.name + ".cv2", (2 + b.repeats) * c, b.c_out, 1,
                              fused);
      break;
    }
    case BlockKind::kSppf: {
      const int64_t hidden = b.c_in() / 2;
      append_conv_block_slots(slots, b.name + ".cv1", b.c_in(), hidden, 1, fused);
      append_conv_block_slots(slots, b.name + ".cv2", 4 * hidden, b.c_out, 1, fused);
      break;
    }
    case BlockKind::kBmsSppf: {
      const std::string sp = b.name + ".sppf";
      const int64_t hidden = b.c_in() / 2;
      append_conv_block_slots(slots, sp + ".cv1", b.c_in(), hidden, 1, fused);
      append_conv_block_slots(slots, sp + ".cv2", 4 * hidden, b.c_out, 1, fused);
      for (SlotSpec& s : bms_sppf_slots(b.bms, b.name))
        if (s.name.rfind(sp + ".", 0) != 0) slots.push_back(std::move(s));
      break;
    }
    case BlockKind::kDetect: {
      const int64_t ch0 = b.in_channels[0];
      const int64_t c2 = std::max<int64_t>({16, ch0 / 4, 4 * g.reg_max()});
      const int64_t c3 = std::max<int64_t>(ch0, std::min<int64_t>(g.nc(), 100));
      for (size_t k = 0; k < b.inputs.size(); ++k) {
        const std::string lv = "." + std::to_string(k);
        const int64_t c = b.in_channels[k];
        const std::string box = b.name + ".cv2" + lv, cls = b.name + ".cv3" + lv;
        append_conv_block_slots(slots, box + ".0", c, c2, 3, fused);
        append_conv_block_slots(slots, box + ".1", c2, c2, 3, fused);
        append_conv_slots(slots, box + ".2", c2, 4 * g.reg_max(), 1, 1, true);
        append_conv_block_slots(slots, cls + ".0", c, c3, 3, fused);
        append_conv_block_slots(slots, cls + ".1", c3, c3, 3, fused);
        append_conv_slots(slots, cls + ".2", c3, g.nc(), 1, 1, true);
      }
      break;
    }
    default:
      break;
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<SlotSpec> model_slots(const ModelGraph& g, bool fused) {
  std::vector<SlotSpec> slots;
  for (const BlockSpec& b : g.nodes) append_block_slots(slots, g, b, fused);
  return slots;
}

WeightStore init_weights(const ModelGraph& g, InitMode mode, uint64_t seed) {
  return init_slots<float>(model_slots(g), mode, seed);
}

void check_weights(const ModelGraph& g, const WeightStore& w) {
  std::set<std::string> folded;  // conv-block prefixes stored with conv bias and no BN
  for (const SlotSpec& s : model_slots(g)) {
    if (!ends_with(s.name, ".bn.weight")) continue;
    const std::string pre = s.name.substr(0, s.name.size() - std::string(".bn.weight").size());
    if (!w.contains(s.name) && w.contains(pre + ".conv.bias")) folded.insert(pre);
  }
  for (const SlotSpec& s : model_slots(g)) {
    const auto bn = s.name.find(".bn.");
    if (bn != std::string::npos && folded.count(s.name.substr(0, bn))) continue;
    const TensorF& t = w.get(s.name);
    if (t.shape() != s.shape)
      fail(ErrorCode::kShape, "weight slot '" + s.name + "' has shape " + t.shape().str() +
                                  ", expected " + s.shape.str());
  }
  for (const std::string& pre : folded) {
    const std::string name = pre + ".conv.bias";
    const int64_t c_out = w.get(pre + ".conv.weight").shape()[0];
    if (w.get(name).shape() != Shape{c_out})
      fail(ErrorCode::kShape, "weight slot '" + name + "' has shape " +
                                  w.get(name).shape().str());
  }
}

std::vector<TensorF> forward(const ModelGraph& g, const WeightStore& w,
                             const TensorF& image) {
  const Shape& s = image.shape();
  check(s.rank() == 4 && s[1] == 3, ErrorCode::kShape,
        "forward: expected an (N, 3, H, W) image, got " + s.str());
  check(s[2] % 32 == 0 && s[3] % 32 == 0, ErrorCode::kShape,
        "forward: image size " + std::to_string(s[2]) + "x" + std::to_string(s[3]) +
            " is not divisible by 32");
  check_weights(g, w);
  EagerOps<float> ops(w);
  return model_forward(ops, g, image);
}

WeightStore fold_batchnorm(const ModelGraph& g, const WeightStore& w) {
  check_weights(g, w);
  WeightStore out;
  std::set<std::string> skip;
  for (const auto& [name, t] : w.entries()) {
    if (skip.count(name)) continue;
    if (!ends_with(name, ".conv.weight")) {
      out.set(name, t);
      continue;
    }
    const std::string pre = name.substr(0, name.size() - std::string(".conv.weight").size());
    if (!w.contains(pre + ".bn.weight")) {
      out.set(name, t);
      continue;
    }
    const TensorF& gamma = w.get(pre + ".bn.weight");
    const TensorF& beta = w.get(pre + ".bn.bias");
    const TensorF& mean = w.get(pre + ".bn.running_mean");
    const TensorF& var = w.get(pre + ".bn.running_var");
    const int64_t c_out = t.shape()[0];
    const int64_t per = t.numel() / c_out;
    TensorF wf = t;
    TensorF bf(Shape{c_out});
    const bool had_bias = w.contains(pre + ".conv.bias");
    for (int64_t o = 0; o < c_out; ++o) {
      const double inv = double(gamma[o]) / std::sqrt(double(var[o]) + kBatchNormEps);
      for (int64_t i = 0; i < per; ++i) wf[o * per + i] = float(double(t[o * per + i]) * inv);
      const double b0 = had_bias ? double(w.get(pre + ".conv.bias")[o]) : 0.0;
      bf[o] = float(double(beta[o]) + (b0 - double(mean[o])) * inv);
    }
    out.set(name, std::move(wf));
    out.set(pre + ".conv.bias", std::move(bf));
    for (const char* sfx : {".bn.weight", ".bn.bias", ".bn.running_mean", ".bn.running_var",
                            ".conv.bias"})
      skip.insert(pre + sfx);
  }
  return out;
}

}  // namespace roc
