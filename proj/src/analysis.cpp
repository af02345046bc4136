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

#include "roc/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace roc {

int64_t conv_block_params(int64_t c_in, int64_t c_out, int k) {
  return c_out * c_in * k * k + 2 * c_out;
}

int64_t conv_block_flops(int64_t c_in, int64_t c_out, int k, int64_t out_hw) {
  return 2 * c_out * c_in * k * k * out_hw;
}

namespace {

struct Cost {
  int64_t params = 0;
  int64_t flops = 0;
  void conv_block(int64_t ci, int64_t co, int k, int64_t hw) {
    params += conv_block_params(ci, co, k);
    flops += conv_block_flops(ci, co, k, hw);
  }
  void conv_bias(int64_t ci, int64_t co, int k, int64_t hw) {
    params += co * ci * k * k + co;
    flops += 2 * co * ci * k * k * hw;
  }
};

Cost c2f_cost(const BlockSpec& b, int64_t hw) {
  Cost c;
  const int64_t h = b.c_out / 2;
  c.conv_block(b.c_in(), 2 * h, 1, hw);
  for (int j = 0; j < b.repeats; ++j) {
    c.conv_block(h, h, 3, hw);
    c.conv_block(h, h, 3, hw);
  }
  c.conv_block((2 + b.repeats) * h, b.c_out, 1, hw);
  return c;
}

Cost sppf_cost(int64_t c_in, int64_t c_out, int64_t hw) {
  Cost c;
  c.conv_block(c_in, c_in / 2, 1, hw);
  c.conv_block(2 * c_in, c_out, 1, hw);
  return c;
}

}  // namespace

NodeCost bms_sppf_cost(const BmsSppfConfig& cfg, int64_t h, int64_t w) {
  cfg.validate();
  Cost c = sppf_cost(cfg.c_in, cfg.c_out, h * w);
  const int64_t C = cfg.c_out;
  for (int k : cfg.mssa.kernels) {
    c.params += 2 * (C / 4) * k;
    c.flops += 2 * (C / 4) * k * (h + w);
  }
  c.params += 2 * 2 * C;  // two gate group norms
  const int s = cfg.cap.block;
  const int64_t hs = h / s, ws = w / s, L = hs * ws;
  if (cfg.cap.strategy == CapStrategy::kRecombine) {
    c.params += C * C * s * s;
    c.flops += 2 * C * C * s * s * L;
  }
  c.params += 2 * C;
  const int64_t per_out = C / cfg.qkv_group_count();
  c.params += 3 * (C * per_out + (cfg.mhsa.qkv_bias ? C : 0));
  c.flops += 3 * 2 * C * per_out * L;
  const int64_t d = C / cfg.mhsa.heads;
  c.flops += cfg.mhsa.heads * 2 * (L * L * d + L * d * d);
  NodeCost n;
  n.kind = "BMS_SPPF";
  n.c_in = cfg.c_in;
  n.c_out = cfg.c_out;
  n.params = c.params;
  n.flops = c.flops;
  return n;
}

CostReport analyze(const ModelGraph& g, int64_t image_h, int64_t image_w) {
  check(image_h > 0 && image_w > 0 && image_h % 32 == 0 && image_w % 32 == 0,
        ErrorCode::kInvalidArgument,
        "analysis: input " + std::to_string(image_h) + "x" + std::to_string(image_w) +
            " is not divisible by 32");
  CostReport r;
  r.image_h = image_h;
  r.image_w = image_w;
  for (const BlockSpec& b : g.nodes) {
    NodeCost n;
    const int64_t oh = image_h / std::max(1, b.feature_stride);
    const int64_t ow = image_w / std::max(1, b.feature_stride);
    const int64_t hw = oh * ow;
    Cost c;
    switch (b.kind) {
      case BlockKind::kConv:
        c.conv_block(b.c_in(), b.c_out, b.kernel, hw);
        break;
      case BlockKind::kC2f:
        c = c2f_cost(b, hw);
        break;
      case BlockKind::kSppf:
        c = sppf_cost(b.c_in(), b.c_out, hw);
        break;
      case BlockKind::kBmsSppf: {
        const NodeCost bc = bms_sppf_cost(b.bms, oh, ow);
        c.params = bc.params;
        c.flops = bc.flops;
        break;
      }
      case BlockKind::kDetect: {
        const int64_t ch0 = b.in_channels[0];
        const int64_t c2 = std::max<int64_t>({16, ch0 / 4, 4 * g.reg_max()});
        const int64_t c3 = std::max<int64_t>(ch0, std::min<int64_t>(g.nc(), 100));
        for (size_t k = 0; k < b.inputs.size(); ++k) {
          const int64_t s = g.strides[k];
          const int64_t lhw = (image_h / s) * (image_w / s);
          const int64_t ci = b.in_channels[k];
          c.conv_block(ci, c2, 3, lhw);
          c.conv_block(c2, c2, 3, lhw);
          c.conv_bias(c2, 4 * g.reg_max(), 1, lhw);
          c.conv_block(ci, c3, 3, lhw);
          c.conv_block(c3, c3, 3, lhw);
          c.conv_bias(c3, g.nc(), 1, lhw);
        }
        break;
      }
      default:
        break;
    }
    n.name = b.name;
    n.kind = block_kind_name(b.kind);
    n.c_in = b.c_in();
    n.c_out = b.c_out;
    n.repeats = b.kind == BlockKind::kC2f ? b.repeats : 0;
    n.params = c.params;
    n.flops = c.flops;
    r.params += n.params;
    r.flops += n.flops;
    r.nodes.push_back(std::move(n));
  }
  const SizeEstimate sz = estimate_size(r.params);
  r.size_bytes_f16 = sz.f16;
  r.size_bytes_f32 = sz.f32;
  return r;
}

int64_t count_params(const ModelGraph& g) { return analyze(g).params; }

int64_t count_flops(const ModelGraph& g, int64_t image_h, int64_t image_w) {
  return analyze(g, image_h, image_w).flops;
}

SizeEstimate estimate_size(int64_t params) {
  return {2 * params + kSerializedOverheadBytes, 4 * params + kSerializedOverheadBytes};
}

CostDiff diff_reports(const CostReport& ref, const CostReport& cand) {
  auto pct = [](double a, double b) { return a == 0.0 ? 0.0 : (a - b) / a * 100.0; };
  auto round_to = [](double v, double q) { return std::round(v / q) * q; };
  CostDiff d;
  d.params_pct = pct(double(ref.params), double(cand.params));
  d.flops_pct = pct(double(ref.flops), double(cand.flops));
  d.size_f16_pct = pct(double(ref.size_bytes_f16), double(cand.size_bytes_f16));
  d.params_pct_table = pct(round_to(ref.params / 1e6, 0.01), round_to(cand.params / 1e6, 0.01));
  d.flops_pct_table = pct(round_to(ref.flops / 1e9, 0.1), round_to(cand.flops / 1e9, 0.1));
  return d;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

}  // namespace

std::string format_report_text(const CostReport& r) {
  std::ostringstream os;
  if (!r.label.empty()) os << "model: " << r.label << "\n";
  os << "input: " << r.image_h << "x" << r.image_w << "\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %-9s %6s %6s %4s %12s %16s\n", "node", "kind",
                "c_in", "c_out", "n", "params", "flops");
  os << line;
  for (const NodeCost& n : r.nodes) {
    std::snprintf(line, sizeof(line), "%-12s %-9s %6lld %6lld %4d %12lld %16lld\n",
                  n.name.c_str(), n.kind.c_str(), (long long)n.c_in, (long long)n.c_out,
                  n.repeats, (long long)n.params, (long long)n.flops);
    os << line;
  }
  os << "params: " << r.params << " (" << fmt("%.4f", r.params / 1e6) << " M)\n";
  os << "GFLOPs: " << fmt("%.4f", r.flops / 1e9) << "\n";
  os << "size f16: " << fmt("%.3f", r.size_bytes_f16 / 1e6) << " MB\n";
  os << "size f32: " << fmt("%.3f", r.size_bytes_f32 / 1e6) << " MB\n";
  return os.str();
}

std::string format_report_kv(const CostReport& r) {
  std::ostringstream os;
  if (!r.label.empty()) os << "label=" << r.label << "\n";
  os << "image_h=" << r.image_h << "\nimage_w=" << r.image_w << "\n";
  os << "params=" << r.params << "\n";
  os << "params_m=" << fmt("%.6f", r.params / 1e6) << "\n";
  os << "flops=" << r.flops << "\n";
  os << "gflops=" << fmt("%.6f", r.flops / 1e9) << "\n";
  os << "size_bytes_f16=" << r.size_bytes_f16 << "\n";
  os << "size_bytes_f32=" << r.size_bytes_f32 << "\n";
  os << "size_mb_f16=" << fmt("%.6f", r.size_bytes_f16 / 1e6) << "\n";
  for (const NodeCost& n : r.nodes)
    os << "node." << n.name << "=" << n.kind << "," << n.params << "," << n.flops << "\n";
  return os.str();
}

std::string format_diff_text(const CostReport& ref, const CostReport& cand,
                             const CostDiff& d) {
  std::ostringstream os;
  os << "reduction " << (ref.label.empty() ? "ref" : ref.label) << " -> "
     << (cand.label.empty() ? "candidate" : cand.label) << "\n";
  os << "  params: " << fmt("%.4f", ref.params / 1e6) << " M -> "
     << fmt("%.4f", cand.params / 1e6) << " M  " << fmt("%.2f", d.params_pct)
     << "% (table precision " << fmt("%.2f", d.params_pct_table) << "%)\n";
  os << "  GFLOPs: " << fmt("%.4f", ref.flops / 1e9) << " -> " << fmt("%.4f", cand.flops / 1e9)
     << "  " << fmt("%.2f", d.flops_pct) << "% (table precision "
     << fmt("%.2f", d.flops_pct_table) << "%)\n";
  os << "  size f16: " << fmt("%.2f", d.size_f16_pct) << "%\n";
  return os.str();
}

std::string format_diff_kv(const CostDiff& d) {
  std::ostringstream os;
  os << "diff.params_pct=" << fmt("%.4f", d.params_pct) << "\n";
  os << "diff.flops_pct=" << fmt("%.4f", d.flops_pct) << "\n";
  os << "diff.size_f16_pct=" << fmt("%.4f", d.size_f16_pct) << "\n";
  os << "diff.params_pct_table=" << fmt("%.4f", d.params_pct_table) << "\n";
  os << "diff.flops_pct_table=" << fmt("%.4f", d.flops_pct_table) << "\n";
  return os.str();
}

}  // namespace roc
