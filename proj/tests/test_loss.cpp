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

#include <cmath>
#include <numbers>

#include "roc/loss.hpp"
#include "test_util.hpp"

namespace roc {
namespace {

using testing::Gen;

BBox random_box(Gen& gen, double extent = 10.0) {
  const double x = gen.uniform(0, extent), y = gen.uniform(0, extent);
  return {x, y, x + gen.uniform(0.2, extent / 2), y + gen.uniform(0.2, extent / 2)};
}

TEST(Iou, HandComputedCases) {
  EXPECT_NEAR(iou({0, 0, 2, 2}, {1, 1, 3, 3}), 1.0 / 7.0, 1e-15);
  EXPECT_EQ(iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0);
  EXPECT_EQ(iou({0, 0, 1, 1}, {1, 0, 2, 1}), 0.0);  // touching edges
  EXPECT_EQ(iou({0, 0, 1, 1}, {5, 5, 6, 6}), 0.0);
  EXPECT_NEAR(iou({0, 0, 4, 4}, {1, 1, 3, 3}), 0.25, 1e-15);
}

TEST(Iou, ZeroAreaBoxesScoreZero) {
  EXPECT_EQ(iou({1, 1, 1, 1}, {1, 1, 1, 1}), 0.0);
  EXPECT_EQ(iou({0, 0, 0, 5}, {0, 0, 2, 5}), 0.0);
}

TEST(Iou, SymmetricAndBoundedProperty) {
  Gen gen(1);
  for (int i = 0; i < 1000; ++i) {
    BBox a = random_box(gen), b = random_box(gen);
    const double v = iou(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(v, iou(b, a));
  }
}

TEST(Ciou, IdenticalBoxesHaveZeroLoss) {
  CiouResult r = ciou_loss({1, 2, 5, 9}, {1, 2, 5, 9});
  EXPECT_NEAR(r.loss, 0.0, 1e-12);
  EXPECT_EQ(r.iou, 1.0);
  EXPECT_EQ(r.center_term, 0.0);
  EXPECT_EQ(r.v, 0.0);
}

TEST(Ciou, HandComputedComponents) {
  // pred (0,0,2,2), target (1,1,3,3): IoU 1/7, centres (1,1) and (2,2),
  // enclosing box 3×3, identical aspect ratio.
  CiouResult r = ciou_loss({0, 0, 2, 2}, {1, 1, 3, 3});
  EXPECT_NEAR(r.iou, 1.0 / 7.0, 1e-15);
  EXPECT_NEAR(r.center_term, 2.0 / (18.0 + kCiouEps), 1e-15);
  EXPECT_NEAR(r.v, 0.0, 1e-15);
  EXPECT_NEAR(r.loss, 1.0 - 1.0 / 7.0 + 2.0 / 18.0, 1e-8);
}

TEST(Ciou, AspectTermForDifferentShapes) {
  const BBox p{0, 0, 4, 1}, t{0, 0, 1, 4};
  CiouResult r = ciou_loss(p, t);
  const double d = std::atan(1.0 / (4 + kCiouEps)) - std::atan(4.0 / (1 + kCiouEps));
  const double v = 4.0 / (std::numbers::pi * std::numbers::pi) * d * d;
  EXPECT_NEAR(r.v, v, 1e-12);
  EXPECT_NEAR(r.alpha, v / ((1 - r.iou) + v + kCiouEps), 1e-12);
  EXPECT_NEAR(r.loss, 1 - r.iou + r.center_term + r.alpha * r.v, 1e-12);
}

TEST(Ciou, BoundedComponentsProperty) {
  Gen gen(2);
  for (int i = 0; i < 1000; ++i) {
    CiouResult r = ciou_loss(random_box(gen), random_box(gen));
    EXPECT_GE(r.loss, 0.0);
    EXPECT_LT(r.loss, 3.0);
    EXPECT_GE(r.center_term, 0.0);
    EXPECT_LT(r.center_term, 1.0);
    EXPECT_GE(r.v, 0.0);
    EXPECT_LE(r.v, 1.0);
    EXPECT_GE(r.alpha, 0.0);
    EXPECT_LE(r.alpha, 1.0);
  }
}

TEST(Ciou, FrozenAlphaGradientMatchesFiniteDifference) {
  Gen gen(3);
  const double h = 1e-6;
  for (int i = 0; i < 300; ++i) {
    const BBox p = random_box(gen), t = random_box(gen);
    const CiouResult r = ciou_loss(p, t);
    const double analytic[4] = {r.grad.x1, r.grad.y1, r.grad.x2, r.grad.y2};
    double numeric[4];
    for (int k = 0; k < 4; ++k) {
      BBox up = p, dn = p;
      (&up.x1)[k] += h;
      (&dn.x1)[k] -= h;
      numeric[k] = (ciou_loss_fixed_alpha(up, t, r.alpha) - ciou_loss_fixed_alpha(dn, t, r.alpha)) /
                   (2 * h);
    }
    double diff = 0, scale = 0;
    for (int k = 0; k < 4; ++k) {
      diff = std::max(diff, std::abs(analytic[k] - numeric[k]));
      scale = std::max({scale, std::abs(analytic[k]), std::abs(numeric[k])});
    }
    EXPECT_LT(diff / scale, 1e-5) << "pair " << i;
  }
}

TEST(Ciou, DescentStepReducesLoss) {
  Gen gen(4);
  for (int i = 0; i < 200; ++i) {
    BBox p = random_box(gen);
    const BBox t = random_box(gen);
    const CiouResult r = ciou_loss(p, t);
    const double step = 1e-3;
    p.x1 -= step * r.grad.x1;
    p.y1 -= step * r.grad.y1;
    p.x2 -= step * r.grad.x2;
    p.y2 -= step * r.grad.y2;
    EXPECT_LE(ciou_loss_fixed_alpha(p, t, r.alpha), r.loss + 1e-12);
  }
}

TEST(Bce, MatchesDefinition) {
  TensorD z(Shape{4}, std::vector<double>{-2, -0.5, 0.3, 3});
  TensorD t(Shape{4}, std::vector<double>{0, 1, 1, 0});
  BceResult<double> r = bce_loss(z, t);
  double want = 0;
  for (int i = 0; i < 4; ++i) {
    const double s = 1 / (1 + std::exp(-z[i]));
    want -= t[i] * std::log(s) + (1 - t[i]) * std::log(1 - s);
    EXPECT_NEAR(r.grad[i], (s - t[i]) / 4, 1e-15);
  }
  EXPECT_NEAR(r.loss, want / 4, 1e-14);
}

TEST(Bce, StableForExtremeLogits) {
  TensorD z(Shape{4}, std::vector<double>{1000, -1000, 1000, -1000});
  TensorD t(Shape{4}, std::vector<double>{1, 0, 0, 1});
  BceResult<double> r = bce_loss(z, t);
  EXPECT_NEAR(r.loss, 500.0, 1e-9);
  EXPECT_TRUE(r.grad.all_finite());
  EXPECT_NEAR(r.grad[2], 0.25, 1e-15);
  EXPECT_NEAR(r.grad[3], -0.25, 1e-15);
}

TEST(Bce, GradientMatchesFiniteDifference) {
  Gen gen(5);
  TensorD z = gen.tensor<double>(Shape{20}, -6, 6);
  TensorD t = gen.tensor<double>(Shape{20}, 0, 1);
  BceResult<double> r = bce_loss(z, t);
  double diff = 0, scale = 0;
  for (int64_t i = 0; i < z.numel(); ++i) {
    TensorD up = z, dn = z;
    up[i] += 1e-6;
    dn[i] -= 1e-6;
    const double n = (bce_loss(up, t).loss - bce_loss(dn, t).loss) / 2e-6;
    diff = std::max(diff, std::abs(n - r.grad[i]));
    scale = std::max({scale, std::abs(n), std::abs(r.grad[i])});
  }
  EXPECT_LT(diff / scale, 1e-5);
}

TEST(Bce, RejectsBadInput) {
  EXPECT_EQ(testing::error_code_of([] { bce_loss(TensorD(Shape{2}), TensorD(Shape{3})); }),
            ErrorCode::kShape);
  TensorD z(Shape{1}, std::vector<double>{std::nan("")});
  EXPECT_EQ(testing::error_code_of([&] { bce_loss(z, TensorD(Shape{1})); }),
            ErrorCode::kInvalidArgument);
}

TEST(TotalLoss, WeightedSumWithDefaults) {
  LossWeights w;
  EXPECT_EQ(w.cls, 0.5);
  EXPECT_EQ(w.loc, 7.5);
  EXPECT_EQ(w.obj, 0.0);
  TotalLoss t = total_loss({2.0, 0.1, 100.0}, w);
  EXPECT_NEAR(t.value, 1.0 + 0.75, 1e-15);
  EXPECT_EQ(t.grad.cls, 0.5);
  EXPECT_EQ(t.grad.loc, 7.5);
  EXPECT_EQ(t.grad.obj, 0.0);
}

TEST(TotalLoss, ValidatesWeightsAndComponents) {
  LossWeights w;
  w.cls = -1;
  EXPECT_EQ(testing::error_code_of([&] { total_loss({}, w); }), ErrorCode::kInvalidArgument);
  LossWeights zero{0, 0, 0};
  EXPECT_EQ(testing::error_code_of([&] { total_loss({}, zero); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(testing::error_code_of([] { total_loss({INFINITY, 0, 0}, LossWeights{}); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace roc
