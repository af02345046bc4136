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

#include "roc/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roc/error.hpp"

namespace roc {

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : 0.0;
}

namespace {

constexpr double kVScale = 4.0 / (std::numbers::pi * std::numbers::pi);

struct Geometry {
  double iw, ih, inter, uni, iou;
  double cw, ch, c2, rho2;
  double atan_p, atan_t, v;
};

Geometry geometry(const BBox& p, const BBox& t) {
  Geometry g{};
  g.iw = std::min(p.x2, t.x2) - std::max(p.x1, t.x1);
  g.ih = std::min(p.y2, t.y2) - std::max(p.y1, t.y1);
  const bool overlap = g.iw > 0 && g.ih > 0;
  g.inter = overlap ? g.iw * g.ih : 0.0;
  g.uni = p.area() + t.area() - g.inter;
  g.iou = (overlap && g.uni > 0) ? g.inter / g.uni : 0.0;
  g.cw = std::max(p.x2, t.x2) - std::min(p.x1, t.x1);
  g.ch = std::max(p.y2, t.y2) - std::min(p.y1, t.y1);
  g.c2 = g.cw * g.cw + g.ch * g.ch + kCiouEps;
  const double dx = (p.x1 + p.x2 - t.x1 - t.x2) / 2;
  const double dy = (p.y1 + p.y2 - t.y1 - t.y2) / 2;
  g.rho2 = dx * dx + dy * dy;
  g.atan_p = std::atan(p.width() / (p.height() + kCiouEps));
  g.atan_t = std::atan(t.width() / (t.height() + kCiouEps));
  g.v = kVScale * (g.atan_t - g.atan_p) * (g.atan_t - g.atan_p);
  return g;
}

}  // namespace

double ciou_loss_fixed_alpha(const BBox& pred, const BBox& target, double alpha) {
  const Geometry g = geometry(pred, target);
  return 1.0 - g.iou + g.rho2 / g.c2 + alpha * g.v;
}

CiouResult ciou_loss(const BBox& p, const BBox& t) {
  const Geometry g = geometry(p, t);
  CiouResult r;
  r.iou = g.iou;
  r.center_term = g.rho2 / g.c2;
  r.v = g.v;
  r.alpha = g.v / ((1.0 - g.iou) + g.v + kCiouEps);
  r.loss = 1.0 - g.iou + r.center_term + r.alpha * g.v;

  // IoU = I / U with U = A_p + A_t − I.
  double dI[4] = {0, 0, 0, 0};  // d inter / d (x1, y1, x2, y2)
  if (g.iw > 0 && g.ih > 0 && g.uni > 0) {
    if (p.x1 > t.x1) dI[0] = -g.ih;
    if (p.x2 < t.x2) dI[2] = g.ih;
    if (p.y1 > t.y1) dI[1] = -g.iw;
    if (p.y2 < t.y2) dI[3] = g.iw;
  }
  const double w = p.width(), h = p.height();
  const double dA[4] = {-h, -w, h, w};
  double dIoU[4] = {0, 0, 0, 0};
  if (g.iou > 0) {
    const double u2 = g.uni * g.uni;
    for (int k = 0; k < 4; ++k)
      dIoU[k] = dI[k] / g.uni - g.inter * (dA[k] - dI[k]) / u2;
  }

  const double dx = (p.x1 + p.x2 - t.x1 - t.x2) / 2;
  const double dy = (p.y1 + p.y2 - t.y1 - t.y2) / 2;
  const double drho[4] = {dx, dy, dx, dy};
  double dcw[4] = {0, 0, 0, 0};
  if (p.x1 <= t.x1) dcw[0] = -1;
  if (p.x2 >= t.x2) dcw[2] = 1;
  double dch[4] = {0, 0, 0, 0};
  if (p.y1 <= t.y1) dch[1] = -1;
  if (p.y2 >= t.y2) dch[3] = 1;

  // v depends on the pred's w and h through atan(w / (h + eps)).
  const double he = h + kCiouEps;
  const double q = w / he;
  const double datan_dw = 1.0 / he / (1.0 + q * q);
  const double datan_dh = -w / (he * he) / (1.0 + q * q);
  const double dv_datan = -2.0 * kVScale * (g.atan_t - g.atan_p);
  const double dv[4] = {-dv_datan * datan_dw, -dv_datan * datan_dh, dv_datan * datan_dw,
                        dv_datan * datan_dh};

  double out[4];
  for (int k = 0; k < 4; ++k) {
    const double dc2 = 2 * g.cw * dcw[k] + 2 * g.ch * dch[k];
    const double dcenter = drho[k] / g.c2 - g.rho2 * dc2 / (g.c2 * g.c2);
    out[k] = -dIoU[k] + dcenter + r.alpha * dv[k];
  }
  r.grad = {out[0], out[1], out[2], out[3]};
  return r;
}

template <typename T>
BceResult<T> bce_loss(const Tensor<T>& logits, const Tensor<T>& targets) {
  check(logits.shape() == targets.shape(), ErrorCode::kShape,
        "bce_loss: logits " + logits.shape().str() + " vs targets " + targets.shape().str());
  const int64_t n = logits.numel();
  check(n > 0, ErrorCode::kInvalidArgument, "bce_loss: empty input");
  BceResult<T> r;
  r.grad = Tensor<T>(logits.shape());
  double sum = 0;
  for (int64_t i = 0; i < n; ++i) {
    const double z = double(logits[i]);
    const double t = double(targets[i]);
    check(std::isfinite(z), ErrorCode::kInvalidArgument, "bce_loss: non-finite logit");
    sum += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
    const double s = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    r.grad[i] = T((s - t) / double(n));
  }
  r.loss = sum / double(n);
  return r;
}

template BceResult<float> bce_loss(const Tensor<float>&, const Tensor<float>&);
template BceResult<double> bce_loss(const Tensor<double>&, const Tensor<double>&);

void LossWeights::validate() const {
  check(cls >= 0 && loc >= 0 && obj >= 0, ErrorCode::kInvalidArgument,
        "loss weights must be non-negative");
  check(cls > 0 || loc > 0 || obj > 0, ErrorCode::kInvalidArgument,
        "at least one loss weight must be nonzero");
}

TotalLoss total_loss(const LossComponents& c, const LossWeights& w) {
  w.validate();
  check(std::isfinite(c.cls) && std::isfinite(c.loc) && std::isfinite(c.obj),
        ErrorCode::kInvalidArgument, "loss components must be finite");
  TotalLoss r;
  r.value = w.cls * c.cls + w.loc * c.loc + w.obj * c.obj;
  r.grad = {w.cls, w.loc, w.obj};
  return r;
}

}  // namespace roc
