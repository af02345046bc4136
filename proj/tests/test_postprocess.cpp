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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "roc/postprocess.hpp"
#include "eval_fixtures.hpp"
#include "test_util.hpp"

namespace roc {
namespace {

using testing::Fixture;
using testing::Gen;
using testing::oracle_class_ap;
using testing::random_fixture;

// ---- decode ----------------------------------------------------------------

// Head maps for a 64×64 input with every logit at `fill`.
std::vector<TensorF> blank_maps(int nc, int reg_max, float fill, int64_t n = 1) {
  std::vector<TensorF> maps;
  for (int s : {8, 16, 32}) maps.emplace_back(Shape{n, 4 * reg_max + nc, 64 / s, 64 / s}, fill);
  return maps;
}

void set_cell(TensorF& m, int64_t b, int64_t i, int64_t j, int reg_max,
              const std::array<int, 4>& bins, int cls, float logit) {
  for (int side = 0; side < 4; ++side)
    for (int k = 0; k < reg_max; ++k)
      m.at(b, side * reg_max + k, i, j) = k == bins[size_t(side)] ? 30.0f : -30.0f;
  m.at(b, 4 * reg_max + cls, i, j) = logit;
}

TEST(Decode, PeakedDistributionGivesIntegerDistances) {
  std::vector<TensorF> maps = blank_maps(3, 16, -20.0f);
  set_cell(maps[1], 0, 1, 2, 16, {1, 2, 1, 0}, 2, 3.0f);  // stride 16 cell (row 1, col 2)
  DecodeOptions opt;
  opt.conf_threshold = 0.5;
  auto out = decode(maps, opt);
  ASSERT_EQ(out.size(), 1u);
  ASSERT_EQ(out[0].size(), 1u);
  const Detection& d = out[0][0];
  EXPECT_EQ(d.cls, 2);
  EXPECT_NEAR(d.conf, 1 / (1 + std::exp(-3.0)), 1e-12);
  // Centre (2.5, 1.5) · 16 = (40, 24); distances (1, 2, 1, 0) · 16.
  EXPECT_NEAR(d.box.x1, 24, 1e-6);
  EXPECT_NEAR(d.box.y1, 0, 1e-6);  // clipped from -8
  EXPECT_NEAR(d.box.x2, 56, 1e-6);
  EXPECT_NEAR(d.box.y2, 24, 1e-6);
}

TEST(Decode, UniformBinsGiveMeanDistance) {
  std::vector<TensorF> maps = blank_maps(1, 4, -20.0f);
  for (int64_t c = 0; c < 16; ++c) maps[0].at(0, c, 3, 3) = 0.0f;
  maps[0].at(0, 16, 3, 3) = 5.0f;
  DecodeOptions opt;
  opt.reg_max = 4;
  auto out = decode(maps, opt);
  ASSERT_EQ(out[0].size(), 1u);
  // Expected bin index 1.5 at stride 8 around centre (28, 28).
  EXPECT_NEAR(out[0][0].box.x1, 16, 1e-5);
  EXPECT_NEAR(out[0][0].box.y1, 16, 1e-5);
  EXPECT_NEAR(out[0][0].box.x2, 40, 1e-5);
  EXPECT_NEAR(out[0][0].box.y2, 40, 1e-5);
}

TEST(Decode, ThresholdIsStrictAndMultiLabelOptional) {
  std::vector<TensorF> maps = blank_maps(2, 16, -20.0f);
  set_cell(maps[2], 0, 0, 0, 16, {0, 0, 1, 1}, 0, 2.0f);
  maps[2].at(0, 64 + 1, 0, 0) = 1.0f;
  DecodeOptions opt;
  opt.conf_threshold = 0.25;
  EXPECT_EQ(decode(maps, opt)[0].size(), 1u);
  opt.multi_label = true;
  EXPECT_EQ(decode(maps, opt)[0].size(), 2u);
  opt.conf_threshold = 1.0;
  EXPECT_TRUE(decode(maps, opt)[0].empty());
}

TEST(Decode, LetterboxMapsBackToSource) {
  std::vector<TensorF> maps = blank_maps(1, 16, -20.0f);
  set_cell(maps[0], 0, 3, 3, 16, {1, 1, 1, 1}, 0, 5.0f);  // box (20,20)-(36,36) in input
  Letterbox lb{0.5, 4, 8, 100, 90};
  auto out = decode(maps, DecodeOptions{}, {lb});
  ASSERT_EQ(out[0].size(), 1u);
  EXPECT_NEAR(out[0][0].box.x1, 32, 1e-6);
  EXPECT_NEAR(out[0][0].box.y1, 24, 1e-6);
  EXPECT_NEAR(out[0][0].box.x2, 64, 1e-6);
  EXPECT_NEAR(out[0][0].box.y2, 56, 1e-6);
}

TEST(Decode, BatchElementsAreIndependent) {
  std::vector<TensorF> maps = blank_maps(1, 16, -20.0f, 2);
  set_cell(maps[0], 1, 0, 0, 16, {0, 0, 1, 1}, 0, 4.0f);
  auto out = decode(maps, DecodeOptions{});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].empty());
  EXPECT_EQ(out[1].size(), 1u);
}

TEST(Decode, RejectsMalformedMaps) {
  std::vector<TensorF> maps = blank_maps(1, 16, 0.0f);
  maps.pop_back();
  EXPECT_EQ(testing::error_code_of([&] { decode(maps, DecodeOptions{}); }), ErrorCode::kShape);
  maps = blank_maps(1, 16, 0.0f);
  maps[1] = TensorF(Shape{1, 65, 3, 4});
  EXPECT_EQ(testing::error_code_of([&] { decode(maps, DecodeOptions{}); }), ErrorCode::kShape);
}

// ---- NMS -------------------------------------------------------------------

TEST(Nms, ChainKeepsFirstAndLast) {
  // A overlaps B, B overlaps C, A and C are disjoint. B is suppressed by A,
  // so C survives even though it overlaps B.
  const Detection a{0, 0.9, {0, 0, 10, 10}};
  const Detection b{0, 0.8, {5, 0, 15, 10}};
  const Detection c{0, 0.7, {10, 0, 20, 10}};
  ASSERT_GT(iou(a.box, b.box), 0.3);
  ASSERT_GT(iou(b.box, c.box), 0.3);
  ASSERT_EQ(iou(a.box, c.box), 0.0);
  std::vector<Detection> kept = nms({c, a, b}, 0.3);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].conf, 0.9);
  EXPECT_EQ(kept[1].conf, 0.7);
}

TEST(Nms, ClassesAreIndependentAndMaxDetCaps) {
  const Detection a{0, 0.9, {0, 0, 10, 10}};
  const Detection b{1, 0.8, {0, 0, 10, 10}};
  const Detection c{0, 0.7, {0, 0, 10, 10}};
  EXPECT_EQ(nms({a, b, c}, 0.5).size(), 2u);
  EXPECT_EQ(nms({a, b, c}, 0.5, 1).size(), 1u);
  // IoU equal to the threshold is kept (suppression needs strictly greater).
  const Detection d{0, 0.5, {0, 0, 10, 20}};
  EXPECT_EQ(nms({a, d}, 0.5).size(), 2u);
}

TEST(Nms, OutputPropertiesRandomized) {
  Gen gen(6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> dets;
    for (int i = 0, n = int(gen.integer(0, 30)); i < n; ++i) {
      const double x = gen.uniform(0, 50), y = gen.uniform(0, 50);
      dets.push_back({int(gen.integer(0, 2)), gen.uniform(0, 1),
                      {x, y, x + gen.uniform(1, 20), y + gen.uniform(1, 20)}});
    }
    const double thr = gen.uniform(0.1, 0.9);
    std::vector<Detection> kept = nms(dets, thr);
    EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end(), detection_before));
    for (size_t i = 0; i < kept.size(); ++i)
      for (size_t j = i + 1; j < kept.size(); ++j)
        if (kept[i].cls == kept[j].cls) {
          EXPECT_LE(iou(kept[i].box, kept[j].box), thr);
        }
    // Every dropped box is covered by a kept box of its class ranked higher.
    for (const Detection& d : dets) {
      const bool in = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
        return k.conf == d.conf && k.box.x1 == d.box.x1 && k.cls == d.cls;
      });
      if (in) continue;
      EXPECT_TRUE(std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
        return k.cls == d.cls && iou(k.box, d.box) > thr && !detection_before(d, k);
      }));
    }
  }
}

// ---- AP / mAP ----------------------------------------------------------------

TEST(Matching, GreedyByConfidenceAndIou) {
  const std::vector<BBox> truths{{0, 0, 10, 10}, {20, 0, 30, 10}};
  std::vector<Detection> dets{{0, 0.9, {0, 0, 10, 10}},
                              {0, 0.8, {1, 0, 11, 10}},  // duplicate of truth 0
                              {0, 0.7, {20, 0, 30, 10}},
                              {0, 0.6, {50, 50, 60, 60}}};
  EXPECT_EQ(match_greedy(dets, truths, 0.5), (std::vector<bool>{true, false, true, false}));
}

TEST(AveragePrecision, HandComputedCurves) {
  EXPECT_DOUBLE_EQ(average_precision({{0.9, true}, {0.8, true}}, 2), 1.0);
  EXPECT_DOUBLE_EQ(average_precision({}, 3), 0.0);
  EXPECT_DOUBLE_EQ(average_precision({{0.9, true}}, 0), 0.0);
  // One of two truths found at precision 1: recall levels 0..0.5 count.
  EXPECT_NEAR(average_precision({{0.9, true}}, 2), 51.0 / 101.0, 1e-15);
  // FP first, then TP: precision 1/2 at recall 1.
  EXPECT_NEAR(average_precision({{0.9, false}, {0.8, true}}, 1), 0.5, 1e-15);
  // Tied confidences enter the curve together.
  EXPECT_NEAR(average_precision({{0.5, false}, {0.5, true}}, 1), 0.5, 1e-15);
  EXPECT_NEAR(average_precision({{0.5, true}, {0.5, false}}, 1), 0.5, 1e-15);
}

TEST(Evaluate, PerfectPredictionsScoreOne) {
  Gen gen(7);
  Fixture f = random_fixture(gen, 4, 6, 6, 0, false);
  for (size_t im = 0; im < f.truths.size(); ++im)
    for (const GroundTruth& t : f.truths[im]) f.dets[im].push_back({t.cls, 1.0, t.box});
  EvalReport r = evaluate(f.dets, f.truths, 4);
  EXPECT_EQ(r.map50, 1.0);
  EXPECT_EQ(r.map50_95, 1.0);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.fp, 0);
  EXPECT_EQ(r.fn, 0);
}

TEST(Evaluate, EmptyDetectionsGiveZeroRecall) {
  Gen gen(8);
  Fixture f = random_fixture(gen, 4, 3, 5, 0, false);
  f.truths[0].push_back({1, {0, 0, 5, 5}});
  EvalReport r = evaluate(f.dets, f.truths, 4);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.map50, 0.0);
  EXPECT_GT(r.fn, 0);
}

TEST(Evaluate, MatchesBruteForceOracleOnSmallFixtures) {
  Gen gen(9);
  for (int trial = 0; trial < 300; ++trial) {
    Fixture f = random_fixture(gen, 2, 1 + int(gen.integer(0, 1)), 3, 5, trial % 2 == 0);
    EvalReport r = evaluate(f.dets, f.truths, 2);
    for (const ClassMetrics& cm : r.per_class)
      for (int s = 0; s < kIouSteps; ++s)
        EXPECT_NEAR(cm.ap[size_t(s)], oracle_class_ap(f, cm.cls, iou_step(s)), 1e-9)
            << "trial " << trial << " class " << cm.cls << " step " << s;
  }
}

TEST(Evaluate, Map50BoundsMap5095Randomized) {
  Gen gen(10);
  for (int trial = 0; trial < 1000; ++trial) {
    Fixture f = random_fixture(gen, 4, int(gen.integer(1, 4)), 8, 12, trial % 3 == 0);
    EvalReport r = evaluate(f.dets, f.truths, 4);
    EXPECT_GE(r.map50, r.map50_95) << "trial " << trial;
    for (const ClassMetrics& cm : r.per_class) {
      for (int s = 1; s < kIouSteps; ++s) EXPECT_GE(cm.ap[size_t(s - 1)], cm.ap[size_t(s)]);
      EXPECT_GE(cm.ap50(), cm.ap50_95());
    }
    EXPECT_GE(r.map50, 0.0);
    EXPECT_LE(r.map50, 1.0);
  }
}

TEST(Evaluate, AveragingNeverExceedsAp50) {
  // Ten copies of 26/303 sum and divide to one ulp above the value itself.
  ClassMetrics cm;
  cm.ap.fill(26.0 / 303.0);
  double naive = 0;
  for (double v : cm.ap) naive += v;
  EXPECT_GT(naive / kIouSteps, cm.ap50());
  EXPECT_EQ(cm.ap50_95(), cm.ap50());
}

TEST(Evaluate, CountsUseReportConfidence) {
  std::vector<std::vector<GroundTruth>> truths{{{0, {0, 0, 10, 10}}, {0, {20, 0, 30, 10}}}};
  std::vector<std::vector<Detection>> dets{{{0, 0.9, {0, 0, 10, 10}},
                                            {0, 0.1, {20, 0, 30, 10}},
                                            {0, 0.5, {50, 50, 60, 60}}}};
  EvalReport r = evaluate(dets, truths, 1);
  EXPECT_EQ(r.tp, 1);
  EXPECT_EQ(r.fp, 1);
  EXPECT_EQ(r.fn, 1);
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_EQ(r.per_class[0].truths, 2);
  // AP still uses every detection: TP at 0.9, FP at 0.5, TP at 0.1.
  const double ap = (51.0 * 1.0 + 50.0 * (2.0 / 3.0)) / 101.0;
  EXPECT_NEAR(r.map50, ap, 1e-12);
  EvalOptions low;
  low.report_conf = 0.0;
  EXPECT_EQ(evaluate(dets, truths, 1, low).tp, 2);
}

TEST(Evaluate, MeanOverClassesPresent) {
  std::vector<std::vector<GroundTruth>> truths{{{0, {0, 0, 10, 10}}, {2, {20, 0, 30, 10}}}};
  std::vector<std::vector<Detection>> dets{{{0, 0.9, {0, 0, 10, 10}}, {1, 0.9, {20, 0, 30, 10}}}};
  EvalReport r = evaluate(dets, truths, 4);
  EXPECT_EQ(r.classes_present, 2);
  EXPECT_DOUBLE_EQ(r.map50, 0.5);
  EXPECT_EQ(class_name(3, 4), "D40");
  EXPECT_EQ(class_name(3, 5), "class3");
}

TEST(Evaluate, RejectsBadInput) {
  EXPECT_EQ(testing::error_code_of([] { evaluate({{}}, {}, 4); }), ErrorCode::kInvalidArgument);
  std::vector<std::vector<Detection>> dets{{{7, 0.5, {0, 0, 1, 1}}}};
  EXPECT_EQ(testing::error_code_of([&] { evaluate(dets, {{}}, 4); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace roc
