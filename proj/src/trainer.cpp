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

#include "roc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "roc/loss.hpp"

namespace roc {

const char* grad_target_name(GradTarget t) {
  switch (t) {
    case GradTarget::kMssa: return "mssa";
    case GradTarget::kCap: return "cap";
    case GradTarget::kMhsa: return "mhsa";
    case GradTarget::kBms: return "bms";
    case GradTarget::kLoss: return "loss";
  }
  return "?";
}

GradTarget parse_grad_target(const std::string& s) {
  for (GradTarget t : {GradTarget::kMssa, GradTarget::kCap, GradTarget::kMhsa,
                       GradTarget::kBms, GradTarget::kLoss})
    if (s == grad_target_name(t)) return t;
  fail(ErrorCode::kInvalidArgument,
       "unknown gradcheck target '" + s + "' (expected mssa, cap, mhsa, bms or loss)");
}

namespace {

using Store = TensorStore<double>;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

TensorD random_tensor(const Shape& s, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  TensorD t(s);
  for (auto& v : t.data()) v = uniform(rng, lo, hi);
  return t;
}

// Random parameters with generic (non-default) norm statistics so that no
// gradient vanishes by symmetry.
Store random_store(const std::vector<SlotSpec>& slots, std::mt19937_64& rng) {
  Store st = init_slots<double>(slots, InitMode::kRandom, rng());
  for (const SlotSpec& s : slots) {
    TensorD& t = st.get_mut(s.name);
    switch (s.role) {
      case SlotRole::kNormScale:
      case SlotRole::kRunningVar:
        t = random_tensor(s.shape, rng, 0.5, 1.5);
        break;
      case SlotRole::kNormShift:
      case SlotRole::kBias:
      case SlotRole::kRunningMean:
        t = random_tensor(s.shape, rng, -0.5, 0.5);
        break;
      default:
        break;
    }
  }
  return st;
}

void accumulate(ParamCheck& pc, double analytic, double numeric) {
  pc.max_abs_diff = std::max(pc.max_abs_diff, std::abs(analytic - numeric));
  pc.max_abs_grad = std::max(pc.max_abs_grad, std::abs(analytic));
  pc.max_abs_numeric = std::max(pc.max_abs_numeric, std::abs(numeric));
  const double denom = std::max(pc.max_abs_grad, pc.max_abs_numeric);
  pc.max_rel_err = denom > 0 ? pc.max_abs_diff / denom : 0.0;
  if (analytic == 0.0) ++pc.zero_grads;
  ++pc.elements;
}

// Checks a module f(ops, x) -> y under the scalar objective sum(r ⊙ y).
template <class Fn>
void check_module(GradcheckReport& rep, const std::string& label,
                  const std::vector<SlotSpec>& slots, const Shape& input_shape,
                  const GradcheckOptions& opt, std::mt19937_64& rng, Fn&& f) {
  Store store = random_store(slots, rng);
  const TensorD x = random_tensor(input_shape, rng);

  Tape<double> tape;
  if (opt.corrupt) tape.inject_sign_flip(*opt.corrupt);
  tape.load_params(store, is_learnable_slot_name);
  const Var xv = tape.leaf(x);
  const Var yv = f(tape, xv);
  std::mt19937_64 seed_rng(rng());
  const TensorD r = random_tensor(tape.shape(yv), seed_rng);
  tape.backward(yv, r);

  auto objective = [&](const Store& s, const TensorD& in) {
    EagerOps<double> ops(s);
    const TensorD y = f(ops, in);
    double acc = 0;
    for (int64_t i = 0; i < y.numel(); ++i) acc += r[i] * y[i];
    return acc;
  };
  const double h = opt.step;
  const std::string pre = label.empty() ? "" : label + "/";

  for (const auto& [name, var] : tape.named_params()) {
    if (!is_learnable_slot_name(name)) continue;
    const TensorD g = tape.grad(var);
    ParamCheck pc;
    pc.name = pre + name;
    TensorD& p = store.get_mut(name);
    for (int64_t i = 0; i < p.numel(); ++i) {
      const double orig = p[i];
      p[i] = orig + h;
      const double fp = objective(store, x);
      p[i] = orig - h;
      const double fm = objective(store, x);
      p[i] = orig;
      accumulate(pc, g[i], (fp - fm) / (2 * h));
    }
    rep.params.push_back(pc);
  }
  {
    const TensorD g = tape.grad(xv);
    ParamCheck pc;
    pc.name = pre + "input";
    TensorD xp = x;
    for (int64_t i = 0; i < xp.numel(); ++i) {
      const double orig = xp[i];
      xp[i] = orig + h;
      const double fp = objective(store, xp);
      xp[i] = orig - h;
      const double fm = objective(store, xp);
      xp[i] = orig;
      accumulate(pc, g[i], (fp - fm) / (2 * h));
    }
    rep.params.push_back(pc);
  }
}

std::vector<SlotSpec> slots_with(const std::vector<SlotSpec>& all, const std::string& part) {
  std::vector<SlotSpec> out;
  for (const SlotSpec& s : all)
    if (s.name.find(part) != std::string::npos) out.push_back(s);
  return out;
}

BmsSppfConfig check_config(int64_t c, CapStrategy cap) {
  BmsSppfConfig cfg;
  cfg.c_in = cfg.c_out = c;
  cfg.cap.strategy = cap;
  return cfg;
}

void check_loss(GradcheckReport& rep, const GradcheckOptions& opt, std::mt19937_64& rng) {
  const double h = opt.step;
  ParamCheck ciou;
  ciou.name = "ciou_loss.pred";
  for (int trial = 0; trial < 100; ++trial) {
    auto box = [&] {
      const double x = uniform(rng, 0, 20), y = uniform(rng, 0, 20);
      return BBox{x, y, x + uniform(rng, 2, 15), y + uniform(rng, 2, 15)};
    };
    const BBox t = box();
    const BBox p = box();
    const CiouResult res = ciou_loss(p, t);
    const double g[4] = {res.grad.x1, res.grad.y1, res.grad.x2, res.grad.y2};
    for (int k = 0; k < 4; ++k) {
      BBox bp = p, bm = p;
      double* cp[4] = {&bp.x1, &bp.y1, &bp.x2, &bp.y2};
      double* cm[4] = {&bm.x1, &bm.y1, &bm.x2, &bm.y2};
      *cp[k] += h;
      *cm[k] -= h;
      const double num = (ciou_loss_fixed_alpha(bp, t, res.alpha) -
                          ciou_loss_fixed_alpha(bm, t, res.alpha)) / (2 * h);
      const double analytic = opt.corrupt ? -g[k] : g[k];
      accumulate(ciou, analytic, num);
    }
  }
  rep.params.push_back(ciou);

  ParamCheck bce;
  bce.name = "bce_loss.logits";
  for (int trial = 0; trial < 20; ++trial) {
    const TensorD z = random_tensor(Shape{2, 3}, rng, -4, 4);
    const TensorD t = random_tensor(Shape{2, 3}, rng, 0, 1);
    const BceResult<double> res = bce_loss(z, t);
    for (int64_t i = 0; i < z.numel(); ++i) {
      TensorD zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double num = (bce_loss(zp, t).loss - bce_loss(zm, t).loss) / (2 * h);
      const double analytic = opt.corrupt ? -res.grad[i] : res.grad[i];
      accumulate(bce, analytic, num);
    }
  }
  rep.params.push_back(bce);
}

}  // namespace

GradcheckReport gradcheck(GradTarget target, const GradcheckOptions& opt) {
  GradcheckReport rep;
  rep.target = grad_target_name(target);
  rep.step = opt.step;
  rep.tolerance = opt.tolerance;
  std::mt19937_64 rng(opt.seed);

  switch (target) {
    case GradTarget::kMssa: {
      const BmsSppfConfig cfg = check_config(8, CapStrategy::kPool);
      check_module(rep, "", slots_with(bms_sppf_slots(cfg, "bms"), ".mssa."), Shape{1, 8, 8, 8},
                   opt, rng, [&](auto& ops, const auto& x) {
                     return mssa_forward(ops, x, cfg.mssa, "bms.mssa").x_prime;
                   });
      break;
    }
    case GradTarget::kCap:
      for (CapStrategy s : {CapStrategy::kPool, CapStrategy::kRecombine}) {
        const BmsSppfConfig cfg = check_config(8, s);
        check_module(rep, cap_strategy_name(s), slots_with(bms_sppf_slots(cfg, "bms"), ".cap."),
                     Shape{1, 8, 8, 8}, opt, rng, [&](auto& ops, const auto& x) {
                       return cap_forward(ops, x, cfg.cap, "bms.cap");
                     });
      }
      break;
    case GradTarget::kMhsa: {
      const BmsSppfConfig cfg = check_config(8, CapStrategy::kPool);
      check_module(rep, "", slots_with(bms_sppf_slots(cfg, "bms"), ".mhsa."), Shape{1, 8, 4, 4},
                   opt, rng, [&](auto& ops, const auto& x) {
                     return mhsa_channel_forward(ops, x, cfg.mhsa, "bms.mhsa");
                   });
      break;
    }
    case GradTarget::kBms:
      for (CapStrategy s : {CapStrategy::kPool, CapStrategy::kRecombine}) {
        const BmsSppfConfig cfg = check_config(16, s);
        check_module(rep, cap_strategy_name(s), bms_sppf_slots(cfg, "bms"), Shape{1, 16, 8, 8},
                     opt, rng, [&](auto& ops, const auto& x) {
                       return bms_sppf_forward(ops, x, cfg, "bms");
                     });
      }
      break;
    case GradTarget::kLoss:
      check_loss(rep, opt, rng);
      break;
  }

  rep.passed = !rep.params.empty();
  rep.all_params_nonzero = true;
  for (const ParamCheck& p : rep.params) {
    rep.max_rel_err = std::max(rep.max_rel_err, p.max_rel_err);
    if (!(p.max_rel_err < opt.tolerance)) rep.passed = false;
    if (!(p.max_abs_grad > 0)) rep.all_params_nonzero = false;
  }
  return rep;
}

std::string format_gradcheck(const GradcheckReport& r) {
  std::ostringstream os;
  char line[200];
  std::snprintf(line, sizeof(line), "gradcheck %s (step %.1e, tolerance %.1e)\n",
                r.target.c_str(), r.step, r.tolerance);
  os << line;
  for (const ParamCheck& p : r.params) {
    std::snprintf(line, sizeof(line), "  %-40s n=%-6lld max_rel_err=%.3e max|g|=%.3e zeros=%lld\n",
                  p.name.c_str(), (long long)p.elements, p.max_rel_err, p.max_abs_grad,
                  (long long)p.zero_grads);
    os << line;
  }
  std::snprintf(line, sizeof(line), "max_rel_err=%.3e nonzero=%s result=%s\n", r.max_rel_err,
                r.all_params_nonzero ? "yes" : "no", r.passed ? "PASS" : "FAIL");
  os << line;
  return os.str();
}

// ---- toy overfit -------------------------------------------------------------

std::vector<ToySample> make_toy_dataset(uint64_t seed, int64_t size) {
  check(size >= 8, ErrorCode::kInvalidArgument, "toy images must be at least 8 pixels");
  std::mt19937_64 rng(seed);
  std::vector<ToySample> out;
  for (int i = 0; i < 8; ++i) {
    const bool vertical = i % 2 == 0;
    TensorD img(Shape{1, 1, size, size});
    const int64_t pos = 2 + int64_t(uniform01(rng) * double(size - 4));
    for (int64_t k = 0; k < size; ++k) {
      if (vertical) img.at(0, 0, k, pos) = 1.0;
      else img.at(0, 0, pos, k) = 1.0;
    }
    for (auto& v : img.data()) v += 0.05 * (uniform01(rng) - 0.5);
    // Zero mean, unit variance per image.
    double mean = 0, var = 0;
    for (double v : img.data()) mean += v;
    mean /= double(img.numel());
    for (double v : img.data()) var += (v - mean) * (v - mean);
    const double inv = 1.0 / std::sqrt(var / double(img.numel()));
    for (auto& v : img.data()) v = (v - mean) * inv;
    out.push_back({std::move(img), vertical ? 1.0 : 0.0});
  }
  return out;
}

BmsSppfConfig toy_bms_config(const ToyOptions& opt) {
  BmsSppfConfig cfg;
  cfg.c_in = cfg.c_out = opt.channels;
  cfg.cap.strategy = opt.cap;
  cfg.validate();
  return cfg;
}

std::vector<SlotSpec> toy_slots(const ToyOptions& opt) {
  std::vector<SlotSpec> slots;
  append_conv_slots(slots, "stem", 1, opt.channels, 3, 1, true);
  for (SlotSpec& s : bms_sppf_slots(toy_bms_config(opt), "bms")) slots.push_back(std::move(s));
  append_conv_slots(slots, "head", opt.channels, 1, 1, 1, true);
  return slots;
}

std::vector<double> moving_average(const std::vector<double>& v, size_t window) {
  std::vector<double> out;
  if (window == 0 || v.size() < window) return out;
  double acc = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    acc += v[i];
    if (i >= window) acc -= v[i - window];
    if (i + 1 >= window) out.push_back(acc / double(window));
  }
  return out;
}

std::string format_trace(const std::vector<double>& losses) {
  std::string s;
  char buf[64];
  for (size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu %.10f\n", i, losses[i]);
    s += buf;
  }
  return s;
}

ToyResult overfit_toy(const ToyOptions& opt) {
  check(opt.steps >= 1, ErrorCode::kInvalidArgument, "steps must be positive");
  check(opt.lr >= 0, ErrorCode::kInvalidArgument, "learning rate must be non-negative");
  const BmsSppfConfig bms = toy_bms_config(opt);
  const std::vector<SlotSpec> slots = toy_slots(opt);
  auto matches = [](const std::string& name, const std::vector<std::string>& parts) {
    return std::any_of(parts.begin(), parts.end(), [&](const std::string& p) {
      return name.find(p) != std::string::npos;
    });
  };

  Store params = init_slots<double>(slots, InitMode::kRandom, opt.seed);
  for (const SlotSpec& s : slots)
    if (matches(s.name, opt.zeroed)) params.set(s.name, TensorD(s.shape));
  Store velocity = init_slots<double>(slots, InitMode::kZero, 0);

  const std::vector<ToySample> data = make_toy_dataset(opt.seed ^ 0x5eedULL, opt.image_size);
  const int64_t n = int64_t(data.size()), S = opt.image_size;
  TensorD batch(Shape{n, 1, S, S});
  TensorD targets(Shape{n, 1, 1, 1});
  for (int64_t i = 0; i < n; ++i) {
    std::copy_n(data[size_t(i)].input.ptr(), S * S, batch.ptr() + i * S * S);
    targets[i] = data[size_t(i)].target;
  }

  ToyResult res;
  for (int step = 0; step < opt.steps; ++step) {
    Tape<double> tape;
    tape.load_params(params, is_learnable_slot_name);
    const Var logits = toy_forward(tape, tape.constant(batch), bms);
    const BceResult<double> loss = bce_loss(tape.value(logits), targets);
    res.losses.push_back(loss.loss);
    if (!std::isfinite(loss.loss)) {
      res.diverged_step = step;
      break;
    }
    tape.backward(logits, loss.grad);
    for (const auto& [name, var] : tape.named_params()) {
      if (!is_learnable_slot_name(name) || matches(name, opt.frozen)) continue;
      const TensorD g = tape.grad(var);
      TensorD& v = velocity.get_mut(name);
      TensorD& p = params.get_mut(name);
      for (int64_t i = 0; i < p.numel(); ++i) {
        v[i] = opt.momentum * v[i] + g[i];
        p[i] -= opt.lr * v[i];
      }
    }
  }

  EagerOps<double> ops(params);
  const TensorD logits = toy_forward(ops, batch, bms);
  int correct = 0;
  for (int64_t i = 0; i < n; ++i) correct += (logits[i] > 0) == (targets[i] > 0.5);
  res.accuracy = double(correct) / double(n);
  res.initial = res.losses.front();
  res.final_loss = bce_loss(logits, targets).loss;
  res.reduction = res.initial > 0 ? 1.0 - res.final_loss / res.initial : 0.0;
  const std::vector<double> sm = moving_average(res.losses, 5);
  res.smoothed_monotone = true;
  for (size_t i = 1; i < sm.size(); ++i)
    if (sm[i] > sm[i - 1] + 1e-12) res.smoothed_monotone = false;
  res.params = std::move(params);
  return res;
}

}  // namespace roc
