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

// Acceptance run: one PASS/FAIL line per criterion check, grouped by
// criterion number. Exit status is 0 when every executed check passes and 3
// otherwise.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "eval_fixtures.hpp"
#include "roc/analysis.hpp"
#include "roc/autograd.hpp"
#include "roc/bms_sppf.hpp"
#include "roc/io.hpp"
#include "roc/model.hpp"
#include "roc/postprocess.hpp"
#include "roc/trainer.hpp"
#include "test_util.hpp"

namespace roc {
namespace {

using testing::Gen;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

class Report {
 public:
  void check(const std::string& id, bool ok, const std::string& detail) {
    std::printf("[%s] %-34s %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    ++total_;
    if (!ok) ++failed_;
  }
  void note(const std::string& id, const std::string& detail) {
    std::printf("[N/A ] %-34s %s\n", id.c_str(), detail.c_str());
  }
  int total() const { return total_; }
  int failed() const { return failed_; }

 private:
  int total_ = 0;
  int failed_ = 0;
};

bool within_rel(double value, double target, double tol) {
  return std::abs(value - target) <= tol * std::abs(target);
}

// ---- 1: cost reproduction ------------------------------------------------------

struct CostTarget {
  const char* config;
  double params;   // millions
  double gflops;
  double params_tol;
  double gflops_tol;
};

void criterion_cost(Report& rep, const std::filesystem::path& configs) {
  const CostTarget targets[] = {
      {"baseline", 3.01, 8.1, 0.015, 0.05}, {"roc", 0.89, 2.6, 0.02, 0.08},
      {"roc_1024", 2.91, 7.6, 0.02, 0.08},  {"roc_256", 0.35, 1.3, 0.02, 0.08},
      {"roc_128", 0.20, 1.0, 0.02, 0.08},
  };
  std::map<std::string, CostReport> reports;
  for (const CostTarget& t : targets) {
    const auto t0 = Clock::now();
    const ModelConfig cfg = load_config((configs / (std::string(t.config) + ".cfg")).string());
    const CostReport r = analyze(build_graph(cfg), 640, 640);
    const double secs = seconds_since(t0);
    reports[t.config] = r;
    const double p = double(r.params) / 1e6, g = double(r.flops) / 1e9;
    rep.check(fmt("1.%s.params", t.config), within_rel(p, t.params, t.params_tol),
              fmt("%.4fM (target %.2fM +/-%.1f%%)", p, t.params, 100 * t.params_tol));
    rep.check(fmt("1.%s.gflops", t.config), within_rel(g, t.gflops, t.gflops_tol),
              fmt("%.4f (target %.1f +/-%.0f%%)", g, t.gflops, 100 * t.gflops_tol));
    rep.check(fmt("1.%s.runtime", t.config), secs < 5.0, fmt("%.3fs (limit 5s)", secs));
  }
  const CostReport& roc = reports["roc"];
  const double mb = double(roc.size_bytes_f16) / 1e6;
  rep.check("1.roc.size_f16", within_rel(mb, 2.0, 0.10),
            fmt("%.3f MB (target 2.0 MB +/-10%%)", mb));

  const char* ladder[] = {"roc_1024", "roc", "roc_256", "roc_128"};
  bool monotone = true;
  for (int i = 1; i < 4; ++i)
    monotone = monotone && reports[ladder[i]].params < reports[ladder[i - 1]].params &&
               reports[ladder[i]].flops < reports[ladder[i - 1]].flops;
  rep.check("1.ladder.monotone", monotone, "params and FLOPs strictly decrease 1024>512>256>128");

  const CostDiff d = diff_reports(reports["baseline"], roc);
  rep.check("1.diff.params", std::abs(d.params_pct - 70.4) <= 0.5,
            fmt("%.2f%% (target 70.4 +/-0.5 pp; %.2f%% from rounded table values)",
                d.params_pct, d.params_pct_table));
  rep.check("1.diff.flops", std::abs(d.flops_pct - 67.9) <= 0.5,
            fmt("%.2f%% (target 67.9 +/-0.5 pp; %.2f%% from rounded table values)",
                d.flops_pct, d.flops_pct_table));
}

// ---- 2: BMS-SPPF mechanism ---------------------------------------------------------

BmsSppfConfig bms_config(int64_t c, CapStrategy cap) {
  BmsSppfConfig cfg;
  cfg.c_in = c;
  cfg.c_out = c;
  cfg.cap.strategy = cap;
  return cfg;
}

TensorStore<double> random_bms_store(const std::vector<SlotSpec>& slots, uint64_t seed) {
  TensorStore<double> store = init_slots<double>(slots, InitMode::kRandom, seed);
  Gen gen(seed + 1);
  for (const SlotSpec& s : slots) {
    TensorD& t = store.get_mut(s.name);
    if (s.role == SlotRole::kNormScale) t = gen.tensor<double>(s.shape, 0.5, 1.5);
    if (s.role == SlotRole::kNormShift || s.role == SlotRole::kBias)
      t = gen.tensor<double>(s.shape, -0.5, 0.5);
  }
  return store;
}

void criterion_mechanism(Report& rep) {
  const auto t0 = Clock::now();
  Gen gen(2024);

  {
    double worst = 0;
    const BmsSppfConfig cfg = bms_config(16, CapStrategy::kPool);
    const std::vector<SlotSpec> slots = bms_sppf_slots(cfg, "m");
    for (int trial = 0; trial < 50; ++trial) {
      TensorStore<double> store = init_slots<double>(slots, InitMode::kRandom, uint64_t(trial));
      for (const SlotSpec& s : slots)
        if (s.name.find(".mssa.") != std::string::npos && s.role == SlotRole::kWeight)
          store.set(s.name, TensorD(s.shape));
      EagerOps<double> ops(store);
      const TensorD x =
          gen.tensor<double>(Shape{2, 16, gen.integer(1, 12), gen.integer(1, 12)}, -10, 10);
      const MssaOutput<TensorD> out = mssa_forward(ops, x, cfg.mssa, "m.mssa");
      worst = std::max(worst, testing::max_abs_diff(out.x_prime, scale(x, 0.25)));
    }
    rep.check("2.mssa.zero_init", worst < 1e-6, fmt("max |out - 0.25x| = %.2e (< 1e-6)", worst));
  }

  {
    int bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const int s = int(gen.integer(1, 4));
      const Shape shape{gen.integer(1, 2), gen.integer(1, 6), s * gen.integer(1, 5),
                        s * gen.integer(1, 5)};
      const TensorF x = gen.tensor<float>(shape, -100, 100);
      const TensorF y = space_to_channel(x, s);
      const bool ok = y.shape() == Shape{shape[0], shape[1] * s * s, shape[2] / s, shape[3] / s} &&
                      testing::bitwise_equal(channel_to_space(y, s), x);
      bad += !ok;
    }
    rep.check("2.space_to_channel.bijection", bad == 0,
              fmt("%d of 200 randomized cases failed bitwise round-trip", bad));
  }

  {
    double row_err = 0, gate_min = 1, gate_max = 0, ratio_err = 0;
    for (CapStrategy cap : {CapStrategy::kPool, CapStrategy::kRecombine}) {
      const BmsSppfConfig cfg = bms_config(16, cap);
      for (int trial = 0; trial < 20; ++trial) {
        TensorStore<double> store = random_bms_store(bms_sppf_slots(cfg, "m"), 500 + trial);
        EagerOps<double> ops(store);
        const int64_t hw = 2 * gen.integer(1, 6);
        const TensorD x = gen.tensor<double>(Shape{2, 16, hw, hw}, -3, 3);
        BmsTrace<TensorD> tr;
        const TensorD out = bms_sppf_forward(ops, x, cfg, "m", &tr);
        const TensorD& attn = tr.mhsa.attention;
        const int64_t L = attn.dim(attn.shape().rank() - 1);
        for (int64_t r = 0; r < attn.numel() / L; ++r) {
          double s = 0;
          for (int64_t j = 0; j < L; ++j) s += attn[r * L + j];
          row_err = std::max(row_err, std::abs(s - 1.0));
        }
        for (const TensorD* gate : {&tr.a_h, &tr.a_w, &tr.a_c})
          for (double v : gate->data()) {
            gate_min = std::min(gate_min, v);
            gate_max = std::max(gate_max, v);
          }
        const int64_t plane = hw * hw;
        for (int64_t nc = 0; nc < 2 * 16; ++nc) {
          double first = std::nan("");
          for (int64_t i = 0; i < plane; ++i) {
            const double xp = tr.x_prime[nc * plane + i];
            if (std::abs(xp) <= 1e-6) continue;
            const double ratio = out[nc * plane + i] / xp;
            if (std::isnan(first)) first = ratio;
            ratio_err = std::max(ratio_err, std::abs(ratio - first));
          }
        }
      }
    }
    rep.check("2.attention.softmax_rows", row_err <= 1e-6,
              fmt("max |row sum - 1| = %.2e (<= 1e-6)", row_err));
    rep.check("2.attention.gates_open_interval", gate_min > 0 && gate_max < 1,
              fmt("gates in [%.3e, %.6f]", gate_min, gate_max));
    rep.check("2.channel_gate.ratio", ratio_err <= 1e-6,
              fmt("max per-channel ratio spread = %.2e (<= 1e-6)", ratio_err));
  }

  {
    int bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const TensorF x = gen.tensor<float>(Shape{1, 3, 16, 16}, -5, 5);
      const TensorF cascade = maxpool2d(maxpool2d(maxpool2d(x, 5, 1, 2), 5, 1, 2), 5, 1, 2);
      bad += !testing::bitwise_equal(cascade, maxpool2d(x, 13, 1, 6));
    }
    rep.check("2.pool_cascade", bad == 0, fmt("%d of 100 random 16x16 inputs differ", bad));
  }

  const double secs = seconds_since(t0);
  rep.check("2.runtime", secs < 60.0, fmt("%.2fs (limit 60s)", secs));
}

// ---- 3: gradients --------------------------------------------------------------

void criterion_gradients(Report& rep) {
  const auto t0 = Clock::now();
  for (GradTarget t : {GradTarget::kMssa, GradTarget::kCap, GradTarget::kMhsa, GradTarget::kBms,
                       GradTarget::kLoss}) {
    const GradcheckReport r = gradcheck(t);
    rep.check(fmt("3.gradcheck.%s", grad_target_name(t)), r.passed,
              fmt("max rel err %.2e over %zu tensors (< 1e-5)", r.max_rel_err, r.params.size()));
    if (t == GradTarget::kBms)
      rep.check("3.bms.all_params_nonzero", r.all_params_nonzero,
                "every learnable tensor has a nonzero gradient");
  }
  GradcheckOptions corrupt;
  corrupt.corrupt = OpKind::kSigmoid;
  const GradcheckReport bad = gradcheck(GradTarget::kBms, corrupt);
  rep.check("3.negative_control", !bad.passed,
            fmt("sign-flipped sigmoid backward gives rel err %.2e", bad.max_rel_err));
  const double secs = seconds_since(t0);
  rep.check("3.runtime", secs < 120.0, fmt("%.2fs (limit 120s)", secs));
}

// ---- 4: toy trainability -----------------------------------------------------------

void criterion_toy(Report& rep) {
  const auto t0 = Clock::now();
  ToyOptions opt;
  opt.seed = 1;
  const ToyResult a = overfit_toy(opt);
  rep.check("4.toy.reduction", a.reduction >= 0.9 && int(a.losses.size()) <= 500,
            fmt("%.2f%% in %zu steps (>= 90%% in <= 500)", 100 * a.reduction, a.losses.size()));
  const ToyResult b = overfit_toy(opt);
  rep.check("4.toy.deterministic", a.losses == b.losses,
            "two runs with the same seed give identical loss traces");
  const double secs = seconds_since(t0);
  rep.check("4.runtime", secs < 300.0, fmt("%.2fs (limit 300s)", secs));
}

// ---- 5: evaluation pipeline ------------------------------------------------------

void criterion_eval(Report& rep) {
  Gen gen(55);
  {
    testing::Fixture f = testing::random_fixture(gen, 4, 8, 6, 0, false);
    for (size_t im = 0; im < f.truths.size(); ++im)
      for (const GroundTruth& t : f.truths[im]) f.dets[im].push_back({t.cls, 0.9, t.box});
    const EvalReport r = evaluate(f.dets, f.truths, 4);
    rep.check("5.perfect_fixture", r.map50 == 1.0 && r.map50_95 == 1.0,
              fmt("mAP50 = %.17g, mAP50:95 = %.17g", r.map50, r.map50_95));
  }
  {
    double worst = 0;
    for (int trial = 0; trial < 500; ++trial) {
      const testing::Fixture f = testing::random_fixture(gen, 2, 1, 3, 5, trial % 2 == 0);
      const EvalReport r = evaluate(f.dets, f.truths, 2);
      for (const ClassMetrics& cm : r.per_class)
        for (int s = 0; s < kIouSteps; ++s)
          worst = std::max(worst, std::abs(cm.ap[size_t(s)] -
                                           testing::oracle_class_ap(f, cm.cls, iou_step(s))));
    }
    rep.check("5.ap_oracle", worst <= 1e-9,
              fmt("max |AP - brute force| = %.2e over 500 five-box fixtures", worst));
  }
  {
    int bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const testing::Fixture f =
          testing::random_fixture(gen, 4, int(gen.integer(1, 4)), 8, 12, trial % 3 == 0);
      const EvalReport r = evaluate(f.dets, f.truths, 4);
      bad += !(r.map50 >= r.map50_95);
    }
    rep.check("5.map50_bounds_map50_95", bad == 0, fmt("%d of 1000 fixtures violate", bad));
  }
  {
    const Detection a{0, 0.9, {0, 0, 10, 10}};
    const Detection b{0, 0.8, {5, 0, 15, 10}};
    const Detection c{0, 0.7, {10, 0, 20, 10}};
    const std::vector<Detection> kept = nms({b, c, a}, 0.3);
    const bool ok = kept.size() == 2 && kept[0].conf == 0.9 && kept[1].conf == 0.7;
    rep.check("5.nms_chain", ok, fmt("kept %zu boxes; expected A and C", kept.size()));
  }
}

// ---- 6: forward shape contract ----------------------------------------------------

WeightStore spread_weights(const ModelGraph& g, uint64_t seed) {
  WeightStore w = init_weights(g, InitMode::kRandom, seed);
  Gen gen(seed + 17);
  for (const SlotSpec& s : model_slots(g)) {
    TensorF& t = w.get_mut(s.name);
    if (s.role == SlotRole::kNormScale || s.role == SlotRole::kRunningVar)
      t = gen.tensor<float>(s.shape, 0.5, 1.5);
    if (s.role == SlotRole::kNormShift || s.role == SlotRole::kRunningMean ||
        s.role == SlotRole::kBias)
      t = gen.tensor<float>(s.shape, -0.2, 0.2);
  }
  return w;
}

void criterion_forward(Report& rep, const std::filesystem::path& configs) {
  Gen gen(66);
  const ModelConfig roc_cfg = load_config((configs / "roc.cfg").string());
  for (int nc : {4, 7}) {
    ModelConfig cfg = roc_cfg;
    cfg.nc = nc;
    const ModelGraph g = build_graph(cfg);
    const WeightStore w = init_weights(g, InitMode::kRandom, 1);
    for (int64_t size : {640, 512}) {
      const std::vector<TensorF> out = forward(g, w, gen.tensor<float>(Shape{1, 3, size, size}, 0, 1));
      bool ok = out.size() == 3;
      std::string shapes;
      for (size_t l = 0; ok && l < 3; ++l) {
        const int64_t s = int64_t(8) << l;
        ok = out[l].shape() == Shape{1, 64 + nc, size / s, size / s} && out[l].all_finite();
        shapes += (l ? " " : "") + out[l].shape().str();
      }
      rep.check(fmt("6.shapes.%lldx%lld.nc%d", (long long)size, (long long)size, nc), ok, shapes);
    }
  }

  const ModelGraph g = build_graph(roc_cfg);
  const WeightStore w = spread_weights(g, 2);
  {
    const TensorF x0 = gen.tensor<float>(Shape{1, 3, 128, 160}, 0, 1);
    const TensorF x1 = gen.tensor<float>(Shape{1, 3, 128, 160}, 0, 1);
    const std::vector<TensorF> parts{x0, x1};
    const std::vector<TensorF> batched = forward(g, w, concat<float>(parts, 0));
    const std::vector<TensorF> s0 = forward(g, w, x0), s1 = forward(g, w, x1);
    double worst = 0;
    for (size_t l = 0; l < 3; ++l) {
      const std::vector<TensorF> seq{s0[l], s1[l]};
      worst = std::max(worst, testing::max_abs_diff(batched[l], concat<float>(seq, 0)));
    }
    rep.check("6.batched_vs_sequential", worst <= 1e-6, fmt("max abs diff %.2e (<= 1e-6)", worst));
  }
  {
    const WeightStore folded = fold_batchnorm(g, w);
    const TensorF x = gen.tensor<float>(Shape{1, 3, 160, 128}, 0, 1);
    const std::vector<TensorF> a = forward(g, w, x), b = forward(g, folded, x);
    double worst = 0;
    for (size_t l = 0; l < 3; ++l)
      worst = std::max(worst, testing::max_abs_diff(a[l], b[l]) /
                                  std::max(testing::max_abs(a[l]), 1e-12));
    rep.check("6.bn_fold", worst <= 1e-4, fmt("max relative diff %.2e (<= 1e-4)", worst));
  }
}

// ---- 7: out of scope -------------------------------------------------------------

void criterion_not_reproducible(Report& rep) {
  rep.note("7.accuracy_figures",
           "trained-model accuracy (mAP, per-class gains, cross-dataset scores) needs full-scale "
           "training and the original datasets");
  rep.note("7.curves_and_qualitative", "loss curves, qualitative detections and heatmaps");
  rep.note("7.absolute_fps", "throughput is reported by `rocdet forward --bench`, not asserted");
}

}  // namespace
}  // namespace roc

int main(int argc, char** argv) {
  CLI::App app{"rocdet acceptance checks"};
  std::vector<int> only;
  std::string configs = std::string(ROC_SOURCE_DIR) + "/configs";
  app.add_option("--only", only, "Criterion numbers to run (default: all)")
      ->check(CLI::Range(1, 7));
  app.add_option("--configs", configs, "Directory holding the model configs")
      ->check(CLI::ExistingDirectory);
  CLI11_PARSE(app, argc, argv);

  const auto selected = [&](int n) {
    return only.empty() || std::find(only.begin(), only.end(), n) != only.end();
  };
  roc::Report rep;
  const std::vector<std::pair<int, std::function<void()>>> criteria{
      {1, [&] { roc::criterion_cost(rep, configs); }},
      {2, [&] { roc::criterion_mechanism(rep); }},
      {3, [&] { roc::criterion_gradients(rep); }},
      {4, [&] { roc::criterion_toy(rep); }},
      {5, [&] { roc::criterion_eval(rep); }},
      {6, [&] { roc::criterion_forward(rep, configs); }},
      {7, [&] { roc::criterion_not_reproducible(rep); }},
  };
  for (const auto& [n, run] : criteria) {
    if (!selected(n)) continue;
    try {
      run();
    } catch (const std::exception& e) {
      rep.check(roc::fmt("%d.error", n), false, e.what());
    }
  }
  std::printf("%d checks, %d passed, %d failed\n", rep.total(), rep.total() - rep.failed(),
              rep.failed());
  return rep.failed() == 0 ? 0 : 3;
}
