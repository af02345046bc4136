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

#ifndef ROC_POSTPROCESS_HPP_
#define ROC_POSTPROCESS_HPP_

#include <array>
#include <string>
#include <vector>

#include "roc/loss.hpp"

namespace roc {

// Mapping from network-input pixels back to the source image:
// src = (net − pad) / scale.
struct Letterbox {
  double scale = 1.0;
  double pad_x = 0.0;
  double pad_y = 0.0;
  int64_t src_w = 0;  // 0 leaves coordinates in network space
  int64_t src_h = 0;

  BBox to_source(const BBox& b) const;
};

struct Detection {
  int cls = 0;
  double conf = 0;
  BBox box;
};

struct DecodeOptions {
  double conf_threshold = 0.25;
  bool multi_label = false;  // one detection per class above threshold, not just the best
  int reg_max = 16;
  std::array<int, 3> strides{8, 16, 32};
};

// Head maps are (N, 4·reg_max + nc, H/s, W/s) in stride order. Returns one
// list per batch element; `boxes` optionally maps each back through a
// letterbox (one per batch element).
std::vector<std::vector<Detection>> decode(const std::vector<TensorF>& maps,
                                           const DecodeOptions& opt,
                                           const std::vector<Letterbox>& boxes = {});

// Orders by descending confidence, then ascending x1, then y1.
bool detection_before(const Detection& a, const Detection& b);

// Greedy per-class suppression; drops a box whose IoU with a kept box of the
// same class exceeds the threshold. Result is in detection_before order.
std::vector<Detection> nms(std::vector<Detection> dets, double iou_threshold,
                           size_t max_det = 0);

struct GroundTruth {
  int cls = 0;
  BBox box;
};

inline constexpr int kIouSteps = 10;  // 0.50, 0.55, ..., 0.95
double iou_step(int i);

struct ClassMetrics {
  int cls = 0;
  int64_t truths = 0;
  int64_t detections = 0;
  std::array<double, kIouSteps> ap{};
  double ap50() const { return ap[0]; }
  double ap50_95() const;
};

struct EvalOptions {
  double report_conf = 0.25;  // threshold for P, R and TP/FP/FN counts
};

struct EvalReport {
  std::vector<ClassMetrics> per_class;  // one per class id
  double precision = 0;
  double recall = 0;
  double map50 = 0;
  double map50_95 = 0;
  int64_t tp = 0, fp = 0, fn = 0;
  int classes_present = 0;
};

// Matching flags for one image and one class at one IoU threshold. `dets`
// must already be in detection_before order.
std::vector<bool> match_greedy(const std::vector<Detection>& dets,
                               const std::vector<BBox>& truths, double iou_threshold);

// 101-point interpolated AP from (confidence, is-true-positive) pairs.
double average_precision(std::vector<std::pair<double, bool>> scored, int64_t n_truth);

EvalReport evaluate(const std::vector<std::vector<Detection>>& dets,
                    const std::vector<std::vector<GroundTruth>>& truths, int nc,
                    const EvalOptions& opt = {});

std::string class_name(int cls, int nc);

}  // namespace roc

#endif  // ROC_POSTPROCESS_HPP_
