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

#ifndef ROC_TESTS_EVAL_FIXTURES_HPP_
#define ROC_TESTS_EVAL_FIXTURES_HPP_

#include <algorithm>
#include <utility>
#include <vector>

#include "roc/postprocess.hpp"
#include "test_util.hpp"

namespace roc::testing {

// Independent AP: one PR point per confidence level, with TP counted as the
// number of distinct truths hit at or above that level (valid when every
// detection overlaps at most one truth), and precision interpolated as the
// maximum over all points at or beyond each of the 101 recall levels.
inline double oracle_ap(std::vector<std::pair<double, int>> dets, int64_t n_truth) {
  if (n_truth == 0) return 0.0;
  std::vector<double> levels;
  for (auto& d : dets) levels.push_back(d.first);
  std::sort(levels.rbegin(), levels.rend());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<std::pair<double, double>> pr;  // (recall, precision)
  for (double lv : levels) {
    std::vector<int> hit;
    int64_t count = 0;
    for (auto& [conf, truth] : dets)
      if (conf >= lv) {
        ++count;
        if (truth >= 0) hit.push_back(truth);
      }
    std::sort(hit.begin(), hit.end());
    const int64_t tp = std::unique(hit.begin(), hit.end()) - hit.begin();
    pr.emplace_back(double(tp) / double(n_truth), double(tp) / double(count));
  }
  double sum = 0;
  for (int r = 0; r <= 100; ++r) {
    double best = 0;
    for (auto [rec, prec] : pr)
      if (rec >= r / 100.0) best = std::max(best, prec);
    sum += best;
  }
  return sum / 101.0;
}

struct Fixture {
  std::vector<std::vector<Detection>> dets;
  std::vector<std::vector<GroundTruth>> truths;
};

// Truths on a coarse grid so that no detection overlaps two of them.
inline Fixture random_fixture(Gen& gen, int nc, int images, int max_truths, int max_dets,
                              bool coarse_conf) {
  Fixture f;
  for (int im = 0; im < images; ++im) {
    std::vector<GroundTruth> gt;
    std::vector<Detection> dt;
    std::vector<int> cells(16);
    for (int i = 0; i < 16; ++i) cells[size_t(i)] = i;
    std::shuffle(cells.begin(), cells.end(), gen.engine());
    const int nt = int(gen.integer(0, max_truths));
    for (int t = 0; t < nt; ++t) {
      const double x = 100.0 * (cells[size_t(t)] % 4), y = 100.0 * (cells[size_t(t)] / 4);
      gt.push_back({int(gen.integer(0, nc - 1)), {x + 10, y + 10, x + 60, y + 60}});
    }
    const int nd = int(gen.integer(0, max_dets));
    for (int d = 0; d < nd; ++d) {
      const double conf = coarse_conf ? gen.integer(1, 4) / 4.0 : gen.uniform(0.01, 1.0);
      if (!gt.empty() && gen.coin(0.7)) {
        const GroundTruth& t = gt[size_t(gen.integer(0, int64_t(gt.size()) - 1))];
        const double j = gen.uniform(-12, 12), k = gen.uniform(-12, 12);
        const int cls = gen.coin(0.85) ? t.cls : int(gen.integer(0, nc - 1));
        dt.push_back({cls, conf, {t.box.x1 + j, t.box.y1 + k, t.box.x2 + j, t.box.y2 + k}});
      } else {
        const double x = gen.uniform(0, 340), y = gen.uniform(0, 340);
        dt.push_back({int(gen.integer(0, nc - 1)), conf, {x, y, x + 50, y + 50}});
      }
    }
    f.truths.push_back(std::move(gt));
    f.dets.push_back(std::move(dt));
  }
  return f;
}

inline double oracle_class_ap(const Fixture& f, int cls, double thr) {
  std::vector<std::pair<double, int>> dets;
  int64_t n_truth = 0;
  int offset = 0;
  for (size_t im = 0; im < f.truths.size(); ++im) {
    std::vector<int> ids;
    for (const GroundTruth& t : f.truths[im])
      if (t.cls == cls) ids.push_back(offset++);
    n_truth += int64_t(ids.size());
    for (const Detection& d : f.dets[im]) {
      if (d.cls != cls) continue;
      int hit = -1, k = 0;
      for (const GroundTruth& t : f.truths[im]) {
        if (t.cls != cls) continue;
        if (iou(d.box, t.box) >= thr) hit = ids[size_t(k)];
        ++k;
      }
      dets.emplace_back(d.conf, hit);
    }
  }
  return oracle_ap(dets, n_truth);
}

}  // namespace roc::testing

#endif  // ROC_TESTS_EVAL_FIXTURES_HPP_
