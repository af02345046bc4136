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

#include "roc/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include "roc/error.hpp"

namespace roc {

BBox Letterbox::to_source(const BBox& b) const {
  BBox o{(b.x1 - pad_x) / scale, (b.y1 - pad_y) / scale, (b.x2 - pad_x) / scale,
         (b.y2 - pad_y) / scale};
  if (src_w > 0 && src_h > 0) {
    const double w = double(src_w), h = double(src_h);
    o.x1 = std::clamp(o.x1, 0.0, w);
    o.x2 = std::clamp(o.x2, 0.0, w);
    o.y1 = std::clamp(o.y1, 0.0, h);
    o.y2 = std::clamp(o.y2, 0.0, h);
  }
  return o;
}

namespace {

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

std::vector<std::vector<Detection>> decode(const std::vector<TensorF>& maps,
                                           const DecodeOptions& opt,
                                           const std::vector<Letterbox>& boxes) {
  check(maps.size() == opt.strides.size(), ErrorCode::kShape,
        "decode: expected 3 head maps, got " + std::to_string(maps.size()));
  const Shape& s0 = maps[0].shape();
  check(s0.rank() == 4, ErrorCode::kShape, "decode: head map must be rank 4, got " + s0.str());
  const int64_t n = s0[0];
  const int64_t box_ch = 4 * int64_t(opt.reg_max);
  const int64_t nc = s0[1] - box_ch;
  check(nc >= 1, ErrorCode::kShape, "decode: head map " + s0.str() + " has no class channels");
  const int64_t in_h = s0[2] * opt.strides[0], in_w = s0[3] * opt.strides[0];
  for (size_t l = 0; l < maps.size(); ++l) {
    const Shape& s = maps[l].shape();
    const int st = opt.strides[l];
    check(s.rank() == 4 && s[0] == n && s[1] == box_ch + nc && s[2] * st == in_h &&
              s[3] * st == in_w,
          ErrorCode::kShape, "decode: malformed head map " + s.str() + " at stride " +
                                 std::to_string(st));
  }
  check(boxes.empty() || int64_t(boxes.size()) == n, ErrorCode::kInvalidArgument,
        "decode: letterbox count does not match batch");

  std::vector<std::vector<Detection>> out(static_cast<size_t>(n));
  std::vector<double> prob(size_t(opt.reg_max));
  for (size_t l = 0; l < maps.size(); ++l) {
    const TensorF& m = maps[l];
    const int64_t H = m.shape()[2], W = m.shape()[3], HW = H * W;
    const double st = opt.strides[l];
    for (int64_t b = 0; b < n; ++b) {
      const float* base = m.ptr() + b * m.shape()[1] * HW;
      for (int64_t i = 0; i < H; ++i)
        for (int64_t j = 0; j < W; ++j) {
          const int64_t cell = i * W + j;
          int best = 0;
          double best_score = -1;
          std::vector<std::pair<int, double>> picks;
          for (int64_t c = 0; c < nc; ++c) {
            const double sc = sigmoid(double(base[(box_ch + c) * HW + cell]));
            if (sc > opt.conf_threshold) {
              if (opt.multi_label) picks.emplace_back(int(c), sc);
              if (sc > best_score) best_score = sc, best = int(c);
            }
          }
          if (!opt.multi_label && best_score >= 0) picks.emplace_back(best, best_score);
          if (picks.empty()) continue;
          double dist[4];
          for (int side = 0; side < 4; ++side) {
            const float* bins = base + int64_t(side) * opt.reg_max * HW + cell;
            double mx = -INFINITY;
            for (int k = 0; k < opt.reg_max; ++k) mx = std::max(mx, double(bins[k * HW]));
            double z = 0, e = 0;
            for (int k = 0; k < opt.reg_max; ++k) {
              prob[size_t(k)] = std::exp(double(bins[k * HW]) - mx);
              z += prob[size_t(k)];
            }
            for (int k = 0; k < opt.reg_max; ++k) e += k * prob[size_t(k)];
            dist[side] = e / z;
          }
          const double cx = j + 0.5, cy = i + 0.5;
          BBox box{(cx - dist[0]) * st, (cy - dist[1]) * st, (cx + dist[2]) * st,
                   (cy + dist[3]) * st};
          box.x1 = std::clamp(box.x1, 0.0, double(in_w));
          box.x2 = std::clamp(box.x2, 0.0, double(in_w));
          box.y1 = std::clamp(box.y1, 0.0, double(in_h));
          box.y2 = std::clamp(box.y2, 0.0, double(in_h));
          if (!boxes.empty()) box = boxes[size_t(b)].to_source(box);
          for (const auto& [c, sc] : picks) out[size_t(b)].push_back({c, sc, box});
        }
    }
  }
  return out;
}

bool detection_before(const Detection& a, const Detection& b) {
  if (a.conf != b.conf) return a.conf > b.conf;
  if (a.box.x1 != b.box.x1) return a.box.x1 < b.box.x1;
  return a.box.y1 < b.box.y1;
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold,
                           size_t max_det) {
  std::stable_sort(dets.begin(), dets.end(), detection_before);
  std::vector<Detection> kept;
  for (const Detection& d : dets) {
    bool keep = true;
    for (const Detection& k : kept)
      if (k.cls == d.cls && iou(k.box, d.box) > iou_threshold) {
        keep = false;
        break;
      }
    if (keep) kept.push_back(d);
    if (max_det > 0 && kept.size() == max_det) break;
  }
  return kept;
}

double iou_step(int i) { return 0.5 + 0.05 * i; }

// Averaged as an offset from AP50 so that rounding cannot lift the mean
// above it.
double ClassMetrics::ap50_95() const {
  double s = 0;
  for (double v : ap) s += v - ap[0];
  return ap[0] + s / kIouSteps;
}

std::vector<bool> match_greedy(const std::vector<Detection>& dets,
                               const std::vector<BBox>& truths, double iou_threshold) {
  std::vector<bool> claimed(truths.size(), false), tp(dets.size(), false);
  for (size_t d = 0; d < dets.size(); ++d) {
    double best = -1;
    size_t best_t = truths.size();
    for (size_t t = 0; t < truths.size(); ++t) {
      if (claimed[t]) continue;
      const double v = iou(dets[d].box, truths[t]);
      if (v >= iou_threshold && v > best) best = v, best_t = t;
    }
    if (best_t < truths.size()) {
      claimed[best_t] = true;
      tp[d] = true;
    }
  }
  return tp;
}

double average_precision(std::vector<std::pair<double, bool>> scored, int64_t n_truth) {
  if (n_truth <= 0) return 0.0;
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  // One PR point per distinct confidence; tied detections enter together.
  std::vector<double> rec, prec;
  int64_t tp = 0, fp = 0;
  for (size_t i = 0; i < scored.size();) {
    size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) {
      (scored[j].second ? tp : fp) += 1;
      ++j;
    }
    rec.push_back(double(tp) / double(n_truth));
    prec.push_back(double(tp) / double(tp + fp));
    i = j;
  }
  // Precision envelope from the right.
  for (size_t k = prec.size(); k-- > 1;) prec[k - 1] = std::max(prec[k - 1], prec[k]);
  double sum = 0;
  size_t k = 0;
  for (int r = 0; r <= 100; ++r) {
    const double level = r / 100.0;
    while (k < rec.size() && rec[k] < level) ++k;
    if (k < rec.size()) sum += prec[k];
  }
  return sum / 101.0;
}

std::string class_name(int cls, int nc) {
  static const char* kDamage[] = {"D00", "D10", "D20", "D40"};
  if (nc == 4 && cls >= 0 && cls < 4) return kDamage[cls];
  return "class" + std::to_string(cls);
}

EvalReport evaluate(const std::vector<std::vector<Detection>>& dets,
                    const std::vector<std::vector<GroundTruth>>& truths, int nc,
                    const EvalOptions& opt) {
  check(nc >= 1, ErrorCode::kInvalidArgument, "evaluate: nc must be positive");
  check(dets.size() == truths.size(), ErrorCode::kInvalidArgument,
        "evaluate: " + std::to_string(dets.size()) + " detection lists for " +
            std::to_string(truths.size()) + " images");
  auto check_cls = [nc](int c) {
    check(c >= 0 && c < nc, ErrorCode::kInvalidArgument,
          "evaluate: class id " + std::to_string(c) + " out of range [0, " +
              std::to_string(nc) + ")");
  };

  EvalReport rep;
  rep.per_class.resize(size_t(nc));
  std::vector<std::array<std::vector<std::pair<double, bool>>, kIouSteps>> scored(static_cast<size_t>(nc));
  for (size_t img = 0; img < dets.size(); ++img) {
    for (const auto& d : dets[img]) check_cls(d.cls);
    for (const auto& t : truths[img]) check_cls(t.cls);
    for (int c = 0; c < nc; ++c) {
      std::vector<Detection> cd;
      for (const auto& d : dets[img])
        if (d.cls == c) cd.push_back(d);
      std::stable_sort(cd.begin(), cd.end(), detection_before);
      std::vector<BBox> ct;
      for (const auto& t : truths[img])
        if (t.cls == c) ct.push_back(t.box);
      ClassMetrics& cm = rep.per_class[size_t(c)];
      cm.truths += int64_t(ct.size());
      cm.detections += int64_t(cd.size());
      for (int s = 0; s < kIouSteps; ++s) {
        const std::vector<bool> tp = match_greedy(cd, ct, iou_step(s));
        for (size_t k = 0; k < cd.size(); ++k) scored[size_t(c)][size_t(s)].emplace_back(cd[k].conf, tp[k]);
      }
      // Counts at the reporting threshold, matched among the retained set only.
      std::vector<Detection> kept;
      for (const auto& d : cd)
        if (d.conf >= opt.report_conf) kept.push_back(d);
      const std::vector<bool> tp = match_greedy(kept, ct, iou_step(0));
      const auto n_tp = int64_t(std::count(tp.begin(), tp.end(), true));
      rep.tp += n_tp;
      rep.fp += int64_t(kept.size()) - n_tp;
      rep.fn += int64_t(ct.size()) - n_tp;
    }
  }
  double m50 = 0, m5095 = 0;
  for (int c = 0; c < nc; ++c) {
    ClassMetrics& cm = rep.per_class[size_t(c)];
    cm.cls = c;
    for (int s = 0; s < kIouSteps; ++s)
      cm.ap[size_t(s)] = average_precision(scored[size_t(c)][size_t(s)], cm.truths);
    if (cm.truths > 0) {
      ++rep.classes_present;
      m50 += cm.ap50();
      m5095 += cm.ap50_95() - cm.ap50();
    }
  }
  if (rep.classes_present > 0) {
    rep.map50 = m50 / rep.classes_present;
    rep.map50_95 = rep.map50 + m5095 / rep.classes_present;
  }
  rep.precision = rep.tp + rep.fp > 0 ? double(rep.tp) / double(rep.tp + rep.fp) : 0.0;
  rep.recall = rep.tp + rep.fn > 0 ? double(rep.tp) / double(rep.tp + rep.fn) : 0.0;
  return rep;
}

}  // namespace roc
