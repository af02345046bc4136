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

#include "roc/analysis.hpp"
#include "roc/autograd.hpp"
#include "roc/bms_sppf.hpp"
#include "test_util.hpp"

namespace roc {
namespace {

using testing::Gen;

BmsSppfConfig make_config(int64_t c, CapStrategy cap) {
  BmsSppfConfig cfg;
  cfg.c_in = c;
  cfg.c_out = c;
  cfg.cap.strategy = cap;
  return cfg;
}

// Random store with non-trivial norm parameters so every gate is exercised.
template <typename T>
TensorStore<T> random_store(const std::vector<SlotSpec>& slots, uint64_t seed) {
  TensorStore<T> store = init_slots<T>(slots, InitMode::kRandom, seed);
  Gen gen(seed + 1);
  for (const SlotSpec& s : slots) {
    Tensor<T>& t = store.get_mut(s.name);
    switch (s.role) {
      case SlotRole::kNormScale:
      case SlotRole::kRunningVar:
        t = gen.tensor<T>(s.shape, 0.5, 1.5);
        break;
      case SlotRole::kNormShift:
      case SlotRole::kRunningMean:
      case SlotRole::kBias:
        t = gen.tensor<T>(s.shape, -0.5, 0.5);
        break;
      default:
        break;
    }
  }
  return store;
}

TEST(BmsSppfConfig, ValidateNamesTheConstraint) {
  BmsSppfConfig cfg = make_config(16, CapStrategy::kPool);
  EXPECT_NO_THROW(cfg.validate());
  cfg.c_out = 18;
  EXPECT_NE(testing::error_message_of([&] { cfg.validate(); }).find("divisible by 4"),
            std::string::npos);
  cfg = make_config(16, CapStrategy::kPool);
  cfg.mhsa.heads = 3;
  EXPECT_NE(testing::error_message_of([&] { cfg.validate(); }).find("heads"), std::string::npos);
  cfg = make_config(16, CapStrategy::kPool);
  cfg.mssa.kernels = {3, 3, 5, 7};
  EXPECT_EQ(testing::error_code_of([&] { cfg.validate(); }), ErrorCode::kInvalidArgument);
  cfg = make_config(16, CapStrategy::kPool);
  cfg.pool_kernel = 4;
  EXPECT_EQ(testing::error_code_of([&] { cfg.validate(); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(parse_cap_strategy("recombine"), CapStrategy::kRecombine);
  EXPECT_EQ(testing::error_code_of([] { parse_cap_strategy("sum"); }),
            ErrorCode::kInvalidArgument);
}

TEST(BmsSppfSlots, ShapesPerStage) {
  BmsSppfConfig cfg = make_config(32, CapStrategy::kRecombine);
  TensorStore<float> store = init_slots<float>(bms_sppf_slots(cfg, "m"), InitMode::kZero, 0);
  EXPECT_EQ(store.get("m.sppf.cv1.conv.weight").shape(), (Shape{16, 32, 1, 1}));
  EXPECT_EQ(store.get("m.sppf.cv2.conv.weight").shape(), (Shape{32, 64, 1, 1}));
  for (int g = 0; g < 4; ++g)
    EXPECT_EQ(store.get("m.mssa.h.dw." + std::to_string(g) + ".weight").shape(),
              (Shape{8, 3 + 2 * g}));
  EXPECT_EQ(store.get("m.cap.unify.weight").shape(), (Shape{32, 128, 1, 1}));
  EXPECT_EQ(store.get("m.mhsa.q.weight").shape(), (Shape{32, 1, 1, 1}));
  EXPECT_FALSE(store.contains("m.mhsa.q.bias"));
}

TEST(BmsSppfSlots, LearnableCountMatchesClosedForm) {
  for (CapStrategy cap : {CapStrategy::kPool, CapStrategy::kRecombine})
    for (int64_t c : {16, 32, 128}) {
      BmsSppfConfig cfg = make_config(c, cap);
      int64_t n = 0;
      for (const SlotSpec& s : bms_sppf_slots(cfg, "m"))
        if (s.learnable()) n += s.shape.numel();
      EXPECT_EQ(bms_sppf_cost(cfg, 20, 20).params, n) << c;
    }
}

TEST(Mssa, ZeroInitIsQuarterScale) {
  Gen gen(31);
  BmsSppfConfig cfg = make_config(16, CapStrategy::kPool);
  std::vector<SlotSpec> slots = bms_sppf_slots(cfg, "m");
  TensorStore<double> store = init_slots<double>(slots, InitMode::kRandom, 1);
  for (const SlotSpec& s : slots)
    if (s.name.find(".mssa.") != std::string::npos && s.role == SlotRole::kWeight)
      store.set(s.name, TensorD(s.shape));
  EagerOps<double> ops(store);
  for (int trial = 0; trial < 20; ++trial) {
    TensorD x = gen.tensor<double>(Shape{2, 16, gen.integer(1, 9), gen.integer(1, 9)}, -10, 10);
    MssaOutput<TensorD> out = mssa_forward(ops, x, cfg.mssa, "m.mssa");
    EXPECT_LT(testing::max_abs_diff(out.x_prime, scale(x, 0.25)), 1e-6);
    for (double a : out.a_h.data()) EXPECT_EQ(a, 0.5);
    for (double a : out.a_w.data()) EXPECT_EQ(a, 0.5);
  }
}

TEST(Mssa, GatesHaveDirectionalShapes) {
  Gen gen(32);
  BmsSppfConfig cfg = make_config(16, CapStrategy::kPool);
  TensorStore<double> store = random_store<double>(bms_sppf_slots(cfg, "m"), 2);
  EagerOps<double> ops(store);
  TensorD x = gen.tensor<double>(Shape{1, 16, 5, 7});
  MssaOutput<TensorD> out = mssa_forward(ops, x, cfg.mssa, "m.mssa");
  EXPECT_EQ(out.a_h.shape(), (Shape{1, 16, 5, 1}));
  EXPECT_EQ(out.a_w.shape(), (Shape{1, 16, 1, 7}));
  EXPECT_EQ(testing::error_code_of([&] {
              mssa_forward(ops, TensorD(Shape{1, 6, 4, 4}), cfg.mssa, "m.mssa");
            }),
            ErrorCode::kInvalidArgument);
}

TEST(Mssa, QuarterKernelsSetReceptiveField) {
  // An impulse in the H-profile of one channel per quarter spreads over
  // exactly that quarter's kernel width before normalization.
  BmsSppfConfig cfg = make_config(16, CapStrategy::kPool);
  std::vector<SlotSpec> slots = bms_sppf_slots(cfg, "m");
  TensorStore<double> store = init_slots<double>(slots, InitMode::kRandom, 3);
  for (int g = 0; g < 4; ++g) {
    TensorD& w = store.get_mut("m.mssa.h.dw." + std::to_string(g) + ".weight");
    for (auto& v : w.data()) v = 1.0;
  }
  EagerOps<double> ops(store);
  TensorD profile(Shape{1, 16, 21, 1});
  for (int g = 0; g < 4; ++g) profile.at(0, 4 * g, 10, 0) = 1.0;
  for (int g = 0; g < 4; ++g) {
    TensorD part = ops.slice(profile, 1, 4 * g, 4);
    TensorD conv = ops.dwconv1d(part, store.get("m.mssa.h.dw." + std::to_string(g) + ".weight"),
                                Axis1d::kH);
    int nonzero = 0;
    for (int64_t h = 0; h < 21; ++h) nonzero += conv.at(0, 0, h, 0) != 0.0;
    EXPECT_EQ(nonzero, cfg.mssa.kernels[size_t(g)]);
  }
}

class BmsProperty : public ::testing::TestWithParam<CapStrategy> {};

TEST_P(BmsProperty, AttentionRowsAndGates) {
  Gen gen(40);
  for (int trial = 0; trial < 10; ++trial) {
    BmsSppfConfig cfg = make_config(16, GetParam());
    TensorStore<double> store = random_store<double>(bms_sppf_slots(cfg, "m"), 100 + trial);
    EagerOps<double> ops(store);
    const int64_t hw = 2 * gen.integer(1, 5);
    TensorD x = gen.tensor<double>(Shape{2, 16, hw, hw}, -3, 3);
    BmsTrace<TensorD> tr;
    TensorD out = bms_sppf_forward(ops, x, cfg, "m", &tr);
    const TensorD& attn = tr.mhsa.attention;
    const int64_t L = attn.dim(2);
    for (int64_t r = 0; r < attn.numel() / L; ++r) {
      double s = 0;
      for (int64_t j = 0; j < L; ++j) s += attn[r * L + j];
      EXPECT_NEAR(s, 1.0, 1e-6);
    }
    for (const TensorD* gate : {&tr.a_h, &tr.a_w, &tr.a_c})
      for (double v : gate->data()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
      }
    EXPECT_EQ(out.shape(), x.shape());
  }
}

TEST_P(BmsProperty, OutputIsChannelScaledMssaOutput) {
  Gen gen(41);
  for (int trial = 0; trial < 10; ++trial) {
    BmsSppfConfig cfg = make_config(16, GetParam());
    TensorStore<double> store = random_store<double>(bms_sppf_slots(cfg, "m"), 200 + trial);
    EagerOps<double> ops(store);
    TensorD x = gen.tensor<double>(Shape{2, 16, 6, 6}, -3, 3);
    BmsTrace<TensorD> tr;
    TensorD out = bms_sppf_forward(ops, x, cfg, "m", &tr);
    const TensorD& xp = tr.x_prime;
    for (int64_t n = 0; n < 2; ++n)
      for (int64_t c = 0; c < 16; ++c) {
        double first = std::nan("");
        for (int64_t i = 0; i < 36; ++i) {
          const int64_t idx = (n * 16 + c) * 36 + i;
          if (std::abs(xp[idx]) <= 1e-6) continue;
          const double ratio = out[idx] / xp[idx];
          if (std::isnan(first)) first = ratio;
          EXPECT_NEAR(ratio, first, 1e-6);
        }
        if (!std::isnan(first)) {
          EXPECT_NEAR(first, tr.a_c.at(n, c, 0, 0), 1e-9);
        }
      }
  }
}

TEST_P(BmsProperty, TapeMatchesEager) {
  Gen gen(42);
  BmsSppfConfig cfg = make_config(16, GetParam());
  TensorStore<double> store = random_store<double>(bms_sppf_slots(cfg, "m"), 7);
  TensorD x = gen.tensor<double>(Shape{1, 16, 8, 8});
  EagerOps<double> ops(store);
  TensorD eager = bms_sppf_forward(ops, x, cfg, "m");
  Tape<double> tape;
  tape.load_params(store, [](const std::string&) { return true; });
  Var out = bms_sppf_forward(tape, tape.leaf(x), cfg, "m");
  EXPECT_TRUE(testing::bitwise_equal(tape.value(out), eager));
}

INSTANTIATE_TEST_SUITE_P(Cap, BmsProperty,
                         ::testing::Values(CapStrategy::kPool, CapStrategy::kRecombine),
                         [](const auto& info) { return std::string(cap_strategy_name(info.param)); });

TEST(BmsSppf, BypassReturnsMssaOutput) {
  Gen gen(43);
  BmsSppfConfig cfg = make_config(16, CapStrategy::kPool);
  TensorStore<double> store = random_store<double>(bms_sppf_slots(cfg, "m"), 9);
  EagerOps<double> ops(store);
  TensorD x = gen.tensor<double>(Shape{1, 16, 4, 4});
  BmsTrace<TensorD> tr;
  bms_sppf_forward(ops, x, cfg, "m", &tr);
  cfg.bypass_channel_gate = true;
  EXPECT_TRUE(testing::bitwise_equal(bms_sppf_forward(ops, x, cfg, "m"), tr.x_prime));
}

TEST(BmsSppf, CapCondensesSpatially) {
  Gen gen(44);
  for (CapStrategy s : {CapStrategy::kPool, CapStrategy::kRecombine}) {
    BmsSppfConfig cfg = make_config(16, s);
    TensorStore<double> store = random_store<double>(bms_sppf_slots(cfg, "m"), 10);
    EagerOps<double> ops(store);
    TensorD y = cap_forward(ops, gen.tensor<double>(Shape{1, 16, 8, 6}), cfg.cap, "m.cap");
    EXPECT_EQ(y.shape(), (Shape{1, 16, 4, 3}));
  }
}

TEST(BmsSppf, MissingSlotIsReported) {
  BmsSppfConfig cfg = make_config(16, CapStrategy::kPool);
  TensorStore<double> store = random_store<double>(bms_sppf_slots(cfg, "m"), 11);
  store.erase("m.mhsa.k.weight");
  EagerOps<double> ops(store);
  const std::string msg = testing::error_message_of(
      [&] { bms_sppf_forward(ops, TensorD(Shape{1, 16, 4, 4}), cfg, "m"); });
  EXPECT_NE(msg.find("m.mhsa.k.weight"), std::string::npos);
}

}  // namespace
}  // namespace roc
