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

#include "roc/nn_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace roc {
namespace {

int64_t conv_out_extent(int64_t in, int64_t k, int stride, int pad) {
  const int64_t span = in + 2 * int64_t(pad) - k;
  if (span < 0) return 0;
  return span / stride + 1;
}

// Range of output columns whose input column ow*stride - pad + kw is in
// [0, in). Returned as [lo, hi).
std::pair<int64_t, int64_t> valid_range(int64_t out, int64_t in, int stride,
                                        int pad, int64_t kw) {
  const int64_t off = kw - pad;
  int64_t lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
  int64_t hi = (in - 1 - off) < 0 ? 0 : (in - 1 - off) / stride + 1;
  lo = std::min(lo, out);
  hi = std::min(hi, out);
  if (hi < lo) hi = lo;
  return {lo, hi};
}

struct ConvDims {
  int64_t n, cin, h, w, cout, kh, kw, ho, wo, cin_g, cout_g;
};

template <typename T>
ConvDims conv_dims(const Tensor<T>& x, const Tensor<T>& weight,
                   const Conv2dGeometry& g) {
  check(x.rank() == 4, ErrorCode::kShape,
        "conv2d: input must be NCHW, got " + x.shape().str());
  check(weight.rank() == 4, ErrorCode::kShape,
        "conv2d: weight must be rank 4, got " + weight.shape().str());
  check(g.groups >= 1 && g.stride_h >= 1 && g.stride_w >= 1 && g.pad_h >= 0 &&
            g.pad_w >= 0,
        ErrorCode::kInvalidArgument, "conv2d: invalid geometry");
  ConvDims d{};
  d.n = x.dim(0);
  d.cin = x.dim(1);
  d.h = x.dim(2);
  d.w = x.dim(3);
  d.cout = weight.dim(0);
  d.kh = weight.dim(2);
  d.kw = weight.dim(3);
  if (d.cin % g.groups != 0 || d.cout % g.groups != 0 ||
      weight.dim(1) * g.groups != d.cin)
    fail(ErrorCode::kShape, "conv2d: channel mismatch, input " +
                                x.shape().str() + " weight " +
                                weight.shape().str() + " groups " +
                                std::to_string(g.groups));
  d.cin_g = d.cin / g.groups;
  d.cout_g = d.cout / g.groups;
  d.ho = conv_out_extent(d.h, d.kh, g.stride_h, g.pad_h);
  d.wo = conv_out_extent(d.w, d.kw, g.stride_w, g.pad_w);
  if (d.ho <= 0 || d.wo <= 0)
    fail(ErrorCode::kShape, "conv2d: non-positive output extent for input " +
                                x.shape().str() + " and kernel " +
                                weight.shape().str());
  return d;
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight,
                 const Tensor<T>* bias, const Conv2dGeometry& g) {
  const ConvDims d = conv_dims(x, weight, g);
  if (bias)
    check(bias->numel() == d.cout, ErrorCode::kShape,
          "conv2d: bias size does not match output channels");
  Tensor<T> out(Shape{d.n, d.cout, d.ho, d.wo});
  const int64_t in_plane = d.h * d.w, out_plane = d.ho * d.wo;
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t co = 0; co < d.cout; ++co) {
      const int64_t grp = co / d.cout_g;
      T* o = out.ptr() + (n * d.cout + co) * out_plane;
      if (bias) std::fill_n(o, out_plane, (*bias)[co]);
      for (int64_t cg = 0; cg < d.cin_g; ++cg) {
        const int64_t ci = grp * d.cin_g + cg;
        const T* xp = x.ptr() + (n * d.cin + ci) * in_plane;
        const T* wp = weight.ptr() + (co * d.cin_g + cg) * d.kh * d.kw;
        for (int64_t kh = 0; kh < d.kh; ++kh)
          for (int64_t kw = 0; kw < d.kw; ++kw) {
            const T wv = wp[kh * d.kw + kw];
            const auto [lo, hi] = valid_range(d.wo, d.w, g.stride_w, g.pad_w, kw);
            for (int64_t oh = 0; oh < d.ho; ++oh) {
              const int64_t ih = oh * g.stride_h - g.pad_h + kh;
              if (ih < 0 || ih >= d.h) continue;
              T* orow = o + oh * d.wo;
              const T* xrow = xp + ih * d.w + (kw - g.pad_w);
              if (g.stride_w == 1) {
                for (int64_t ow = lo; ow < hi; ++ow) orow[ow] += wv * xrow[ow];
              } else {
                for (int64_t ow = lo; ow < hi; ++ow)
                  orow[ow] += wv * xrow[ow * g.stride_w];
              }
            }
          }
      }
    }
  return out;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight,
                               bool has_bias, const Conv2dGeometry& g,
                               const Tensor<T>& grad_out) {
  const ConvDims d = conv_dims(x, weight, g);
  check(grad_out.shape() == Shape{d.n, d.cout, d.ho, d.wo}, ErrorCode::kShape,
        "conv2d_backward: gradient shape mismatch");
  Conv2dGrads<T> r{Tensor<T>(x.shape()), Tensor<T>(weight.shape()), {}};
  if (has_bias) r.bias = Tensor<T>(Shape{d.cout});
  const int64_t in_plane = d.h * d.w, out_plane = d.ho * d.wo;
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t co = 0; co < d.cout; ++co) {
      const int64_t grp = co / d.cout_g;
      const T* go = grad_out.ptr() + (n * d.cout + co) * out_plane;
      if (has_bias) {
        T acc = 0;
        for (int64_t i = 0; i < out_plane; ++i) acc += go[i];
        (*r.bias)[co] += acc;
      }
      for (int64_t cg = 0; cg < d.cin_g; ++cg) {
        const int64_t ci = grp * d.cin_g + cg;
        const T* xp = x.ptr() + (n * d.cin + ci) * in_plane;
        T* gx = r.input.ptr() + (n * d.cin + ci) * in_plane;
        const T* wp = weight.ptr() + (co * d.cin_g + cg) * d.kh * d.kw;
        T* gw = r.weight.ptr() + (co * d.cin_g + cg) * d.kh * d.kw;
        for (int64_t kh = 0; kh < d.kh; ++kh)
          for (int64_t kw = 0; kw < d.kw; ++kw) {
            const T wv = wp[kh * d.kw + kw];
            T wacc = 0;
            const auto [lo, hi] = valid_range(d.wo, d.w, g.stride_w, g.pad_w, kw);
            for (int64_t oh = 0; oh < d.ho; ++oh) {
              const int64_t ih = oh * g.stride_h - g.pad_h + kh;
              if (ih < 0 || ih >= d.h) continue;
              const T* grow = go + oh * d.wo;
              const int64_t base = ih * d.w + (kw - g.pad_w);
              for (int64_t ow = lo; ow < hi; ++ow) {
                const int64_t ix = base + ow * g.stride_w;
                wacc += xp[ix] * grow[ow];
                gx[ix] += wv * grow[ow];
              }
            }
            gw[kh * d.kw + kw] += wacc;
          }
      }
    }
  return r;
}

namespace {

template <typename T>
void check_dw1d(const Tensor<T>& x, const Tensor<T>& weight) {
  check(x.rank() == 4, ErrorCode::kShape,
        "dwconv1d: input must be NCHW, got " + x.shape().str());
  check(weight.rank() == 2 && weight.dim(0) == x.dim(1), ErrorCode::kShape,
        "dwconv1d: weight " + weight.shape().str() +
            " does not provide one kernel per channel of " + x.shape().str());
  check(weight.dim(1) % 2 == 1, ErrorCode::kInvalidArgument,
        "dwconv1d: kernel length must be odd, got " +
            std::to_string(weight.dim(1)));
}

}  // namespace

template <typename T>
Tensor<T> dwconv1d(const Tensor<T>& x, const Tensor<T>& weight, Axis1d axis) {
  check_dw1d(x, weight);
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t k = weight.dim(1), r = k / 2;
  Tensor<T> out(x.shape());
  for (int64_t n = 0; n < N; ++n)
    for (int64_t c = 0; c < C; ++c) {
      const T* w = weight.ptr() + c * k;
      const T* xp = x.ptr() + (n * C + c) * H * W;
      T* op = out.ptr() + (n * C + c) * H * W;
      for (int64_t h = 0; h < H; ++h)
        for (int64_t ww = 0; ww < W; ++ww) {
          T acc = 0;
          for (int64_t j = 0; j < k; ++j) {
            if (axis == Axis1d::kW) {
              const int64_t iw = ww + j - r;
              if (iw >= 0 && iw < W) acc += w[j] * xp[h * W + iw];
            } else {
              const int64_t ih = h + j - r;
              if (ih >= 0 && ih < H) acc += w[j] * xp[ih * W + ww];
            }
          }
          op[h * W + ww] = acc;
        }
    }
  return out;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> dwconv1d_backward(const Tensor<T>& x,
                                                  const Tensor<T>& weight,
                                                  Axis1d axis,
                                                  const Tensor<T>& grad_out) {
  check_dw1d(x, weight);
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t k = weight.dim(1), r = k / 2;
  Tensor<T> gx(x.shape()), gw(weight.shape());
  for (int64_t n = 0; n < N; ++n)
    for (int64_t c = 0; c < C; ++c) {
      const T* w = weight.ptr() + c * k;
      T* gwc = gw.ptr() + c * k;
      const T* xp = x.ptr() + (n * C + c) * H * W;
      T* gxp = gx.ptr() + (n * C + c) * H * W;
      const T* gop = grad_out.ptr() + (n * C + c) * H * W;
      for (int64_t h = 0; h < H; ++h)
        for (int64_t ww = 0; ww < W; ++ww) {
          const T g = gop[h * W + ww];
          for (int64_t j = 0; j < k; ++j) {
            int64_t idx;
            if (axis == Axis1d::kW) {
              const int64_t iw = ww + j - r;
              if (iw < 0 || iw >= W) continue;
              idx = h * W + iw;
            } else {
              const int64_t ih = h + j - r;
              if (ih < 0 || ih >= H) continue;
              idx = ih * W + ww;
            }
            gwc[j] += g * xp[idx];
            gxp[idx] += g * w[j];
          }
        }
    }
  return {std::move(gx), std::move(gw)};
}

namespace {

struct PoolDims {
  int64_t n, c, h, w, ho, wo;
};

template <typename T>
PoolDims pool_dims(const Tensor<T>& x, int k, int stride, int pad) {
  check(x.rank() == 4, ErrorCode::kShape,
        "maxpool2d: input must be NCHW, got " + x.shape().str());
  check(k >= 1 && stride >= 1 && pad >= 0 && 2 * pad < k + 1,
        ErrorCode::kInvalidArgument, "maxpool2d: invalid configuration");
  PoolDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3), 0, 0};
  d.ho = conv_out_extent(d.h, k, stride, pad);
  d.wo = conv_out_extent(d.w, k, stride, pad);
  if (d.ho <= 0 || d.wo <= 0)
    fail(ErrorCode::kShape, "maxpool2d: non-positive output extent for " +
                                x.shape().str());
  return d;
}

// Flat in-plane index of the first maximal element of one window.
template <typename T>
int64_t window_argmax(const T* xp, const PoolDims& d, int k, int stride,
                      int pad, int64_t oh, int64_t ow) {
  int64_t best = -1;
  T best_v = -std::numeric_limits<T>::infinity();
  for (int64_t i = 0; i < k; ++i) {
    const int64_t ih = oh * stride - pad + i;
    if (ih < 0 || ih >= d.h) continue;
    for (int64_t j = 0; j < k; ++j) {
      const int64_t iw = ow * stride - pad + j;
      if (iw < 0 || iw >= d.w) continue;
      const T v = xp[ih * d.w + iw];
      if (best < 0 || v > best_v) {
        best = ih * d.w + iw;
        best_v = v;
      }
    }
  }
  return best;
}

}  // namespace

template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& x, int k, int stride, int pad) {
  const PoolDims d = pool_dims(x, k, stride, pad);
  Tensor<T> out(Shape{d.n, d.c, d.ho, d.wo});
  for (int64_t p = 0; p < d.n * d.c; ++p) {
    const T* xp = x.ptr() + p * d.h * d.w;
    T* op = out.ptr() + p * d.ho * d.wo;
    if (stride == 1 && k > 1) {
      // Separable: max over rows, then over columns.
      std::vector<T> rowmax(size_t(d.h * d.wo));
      for (int64_t h = 0; h < d.h; ++h)
        for (int64_t ow = 0; ow < d.wo; ++ow) {
          T m = -std::numeric_limits<T>::infinity();
          for (int64_t j = 0; j < k; ++j) {
            const int64_t iw = ow - pad + j;
            if (iw >= 0 && iw < d.w) m = std::max(m, xp[h * d.w + iw]);
          }
          rowmax[size_t(h * d.wo + ow)] = m;
        }
      for (int64_t oh = 0; oh < d.ho; ++oh)
        for (int64_t ow = 0; ow < d.wo; ++ow) {
          T m = -std::numeric_limits<T>::infinity();
          for (int64_t i = 0; i < k; ++i) {
            const int64_t ih = oh - pad + i;
            if (ih >= 0 && ih < d.h) m = std::max(m, rowmax[size_t(ih * d.wo + ow)]);
          }
          op[oh * d.wo + ow] = m;
        }
    } else {
      for (int64_t oh = 0; oh < d.ho; ++oh)
        for (int64_t ow = 0; ow < d.wo; ++ow)
          op[oh * d.wo + ow] = xp[window_argmax(xp, d, k, stride, pad, oh, ow)];
    }
  }
  return out;
}

template <typename T>
Tensor<T> maxpool2d_backward(const Tensor<T>& x, int k, int stride, int pad,
                             const Tensor<T>& grad_out) {
  const PoolDims d = pool_dims(x, k, stride, pad);
  check(grad_out.shape() == Shape{d.n, d.c, d.ho, d.wo}, ErrorCode::kShape,
        "maxpool2d_backward: gradient shape mismatch");
  Tensor<T> gx(x.shape());
  for (int64_t p = 0; p < d.n * d.c; ++p) {
    const T* xp = x.ptr() + p * d.h * d.w;
    const T* gp = grad_out.ptr() + p * d.ho * d.wo;
    T* gxp = gx.ptr() + p * d.h * d.w;
    for (int64_t oh = 0; oh < d.ho; ++oh)
      for (int64_t ow = 0; ow < d.wo; ++ow)
        gxp[window_argmax(xp, d, k, stride, pad, oh, ow)] += gp[oh * d.wo + ow];
  }
  return gx;
}

template <typename T>
Tensor<T> avgpool2d(const Tensor<T>& x, int k) {
  check(x.rank() == 4 && k >= 1, ErrorCode::kShape,
        "avgpool2d: input must be NCHW");
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t ho = H / k, wo = W / k;
  check(ho >= 1 && wo >= 1, ErrorCode::kShape,
        "avgpool2d: non-positive output extent for " + x.shape().str());
  Tensor<T> out(Shape{N, C, ho, wo});
  const T inv = T(1) / T(k * k);
  for (int64_t p = 0; p < N * C; ++p) {
    const T* xp = x.ptr() + p * H * W;
    T* op = out.ptr() + p * ho * wo;
    for (int64_t oh = 0; oh < ho; ++oh)
      for (int64_t ow = 0; ow < wo; ++ow) {
        T acc = 0;
        for (int64_t i = 0; i < k; ++i)
          for (int64_t j = 0; j < k; ++j) acc += xp[(oh * k + i) * W + ow * k + j];
        op[oh * wo + ow] = acc * inv;
      }
  }
  return out;
}

template <typename T>
Tensor<T> avgpool2d_backward(const Shape& x_shape, int k,
                             const Tensor<T>& grad_out) {
  const int64_t N = x_shape[0], C = x_shape[1], H = x_shape[2], W = x_shape[3];
  const int64_t ho = H / k, wo = W / k;
  Tensor<T> gx(x_shape);
  const T inv = T(1) / T(k * k);
  for (int64_t p = 0; p < N * C; ++p) {
    const T* gp = grad_out.ptr() + p * ho * wo;
    T* gxp = gx.ptr() + p * H * W;
    for (int64_t oh = 0; oh < ho; ++oh)
      for (int64_t ow = 0; ow < wo; ++ow)
        for (int64_t i = 0; i < k; ++i)
          for (int64_t j = 0; j < k; ++j)
            gxp[(oh * k + i) * W + ow * k + j] = gp[oh * wo + ow] * inv;
  }
  return gx;
}

namespace {

template <typename T>
T sigmoid_scalar(T v) {
  if (v >= 0) return T(1) / (T(1) + std::exp(-v));
  const T e = std::exp(v);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  Tensor<T> out(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) out[i] = sigmoid_scalar(x[i]);
  return out;
}

template <typename T>
Tensor<T> sigmoid_backward(const Tensor<T>& y, const Tensor<T>& grad_out) {
  Tensor<T> gx(y.shape());
  for (int64_t i = 0; i < y.numel(); ++i)
    gx[i] = grad_out[i] * y[i] * (T(1) - y[i]);
  return gx;
}

template <typename T>
Tensor<T> silu(const Tensor<T>& x) {
  Tensor<T> out(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) out[i] = x[i] * sigmoid_scalar(x[i]);
  return out;
}

template <typename T>
Tensor<T> silu_backward(const Tensor<T>& x, const Tensor<T>& grad_out) {
  Tensor<T> gx(x.shape());
  for (int64_t i = 0; i < x.numel(); ++i) {
    const T s = sigmoid_scalar(x[i]);
    gx[i] = grad_out[i] * s * (T(1) + x[i] * (T(1) - s));
  }
  return gx;
}

template <typename T>
Tensor<T> softmax_lastdim(const Tensor<T>& x) {
  const int64_t m = x.dim(x.rank() - 1);
  const int64_t rows = x.numel() / m;
  Tensor<T> out(x.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const T* xp = x.ptr() + r * m;
    T* op = out.ptr() + r * m;
    const T mx = *std::max_element(xp, xp + m);
    T sum = 0;
    for (int64_t j = 0; j < m; ++j) {
      op[j] = std::exp(xp[j] - mx);
      sum += op[j];
    }
    const T inv = T(1) / sum;
    for (int64_t j = 0; j < m; ++j) op[j] *= inv;
  }
  return out;
}

template <typename T>
Tensor<T> softmax_lastdim_backward(const Tensor<T>& y,
                                   const Tensor<T>& grad_out) {
  const int64_t m = y.dim(y.rank() - 1);
  const int64_t rows = y.numel() / m;
  Tensor<T> gx(y.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const T* yp = y.ptr() + r * m;
    const T* gp = grad_out.ptr() + r * m;
    T dot = 0;
    for (int64_t j = 0; j < m; ++j) dot += yp[j] * gp[j];
    for (int64_t j = 0; j < m; ++j) gx[r * m + j] = yp[j] * (gp[j] - dot);
  }
  return gx;
}

namespace {

struct NormDims {
  int64_t n, c, spatial, cpg;
};

template <typename T>
NormDims gn_dims(const Tensor<T>& x, const Tensor<T>& gamma, int groups) {
  check(x.rank() >= 2, ErrorCode::kShape, "group_norm: rank must be >= 2");
  check(groups >= 1 && x.dim(1) % groups == 0, ErrorCode::kInvalidArgument,
        "group_norm: " + std::to_string(x.dim(1)) +
            " channels not divisible into " + std::to_string(groups) +
            " groups");
  check(gamma.numel() == x.dim(1), ErrorCode::kShape,
        "group_norm: gamma size does not match channels");
  NormDims d{x.dim(0), x.dim(1), x.numel() / (x.dim(0) * x.dim(1)), 0};
  d.cpg = d.c / groups;
  return d;
}

}  // namespace

template <typename T>
Tensor<T> group_norm(const Tensor<T>& x, const Tensor<T>& gamma,
                     const Tensor<T>& beta, int groups, double eps) {
  const NormDims d = gn_dims(x, gamma, groups);
  Tensor<T> out(x.shape());
  const int64_t gsize = d.cpg * d.spatial;
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t g = 0; g < groups; ++g) {
      const int64_t base = (n * d.c + g * d.cpg) * d.spatial;
      double mean = 0;
      for (int64_t i = 0; i < gsize; ++i) mean += double(x[base + i]);
      mean /= double(gsize);
      double var = 0;
      for (int64_t i = 0; i < gsize; ++i) {
        const double t = double(x[base + i]) - mean;
        var += t * t;
      }
      var /= double(gsize);
      const double rstd = 1.0 / std::sqrt(var + eps);
      for (int64_t cc = 0; cc < d.cpg; ++cc) {
        const int64_t c = g * d.cpg + cc;
        for (int64_t s = 0; s < d.spatial; ++s) {
          const int64_t i = base + cc * d.spatial + s;
          out[i] = T((double(x[i]) - mean) * rstd * double(gamma[c]) +
                     double(beta[c]));
        }
      }
    }
  return out;
}

template <typename T>
NormGrads<T> group_norm_backward(const Tensor<T>& x, const Tensor<T>& gamma,
                                 int groups, double eps,
                                 const Tensor<T>& grad_out) {
  const NormDims d = gn_dims(x, gamma, groups);
  NormGrads<T> r{Tensor<T>(x.shape()), Tensor<T>(gamma.shape()),
                 Tensor<T>(gamma.shape())};
  const int64_t gsize = d.cpg * d.spatial;
  std::vector<double> xhat(static_cast<size_t>(gsize)), dxhat(static_cast<size_t>(gsize));
  for (int64_t n = 0; n < d.n; ++n)
    for (int64_t g = 0; g < groups; ++g) {
      const int64_t base = (n * d.c + g * d.cpg) * d.spatial;
      double mean = 0;
      for (int64_t i = 0; i < gsize; ++i) mean += double(x[base + i]);
      mean /= double(gsize);
      double var = 0;
      for (int64_t i = 0; i < gsize; ++i) {
        const double t = double(x[base + i]) - mean;
        var += t * t;
      }
      var /= double(gsize);
      const double rstd = 1.0 / std::sqrt(var + eps);
      double mean_dxhat = 0, mean_dxhat_xhat = 0;
      for (int64_t cc = 0; cc < d.cpg; ++cc) {
        const int64_t c = g * d.cpg + cc;
        for (int64_t s = 0; s < d.spatial; ++s) {
          const int64_t li = cc * d.spatial + s;
          const int64_t i = base + li;
          const double gy = double(grad_out[i]);
          xhat[size_t(li)] = (double(x[i]) - mean) * rstd;
          dxhat[size_t(li)] = gy * double(gamma[c]);
          r.gamma[c] += T(gy * xhat[size_t(li)]);
          r.beta[c] += T(gy);
          mean_dxhat += dxhat[size_t(li)];
          mean_dxhat_xhat += dxhat[size_t(li)] * xhat[size_t(li)];
        }
      }
      mean_dxhat /= double(gsize);
      mean_dxhat_xhat /= double(gsize);
      for (int64_t li = 0; li < gsize; ++li)
        r.input[base + li] =
            T(rstd * (dxhat[size_t(li)] - mean_dxhat -
                      xhat[size_t(li)] * mean_dxhat_xhat));
    }
  return r;
}

template <typename T>
Tensor<T> batch_norm_infer(const Tensor<T>& x, const BatchNormParams<T>& p) {
  check(x.rank() >= 2 && p.gamma.numel() == x.dim(1), ErrorCode::kShape,
        "batch_norm: parameter size does not match channels of " +
            x.shape().str());
  const int64_t N = x.dim(0), C = x.dim(1), S = x.numel() / (N * C);
  Tensor<T> out(x.shape());
  for (int64_t c = 0; c < C; ++c) {
    const T a = T(double(p.gamma[c]) / std::sqrt(double(p.var[c]) + p.eps));
    const T b = p.beta[c] - a * p.mean[c];
    for (int64_t n = 0; n < N; ++n) {
      const T* xp = x.ptr() + (n * C + c) * S;
      T* op = out.ptr() + (n * C + c) * S;
      for (int64_t s = 0; s < S; ++s) op[s] = a * xp[s] + b;
    }
  }
  return out;
}

template <typename T>
NormGrads<T> batch_norm_infer_backward(const Tensor<T>& x,
                                       const BatchNormParams<T>& p,
                                       const Tensor<T>& grad_out) {
  const int64_t N = x.dim(0), C = x.dim(1), S = x.numel() / (N * C);
  NormGrads<T> r{Tensor<T>(x.shape()), Tensor<T>(p.gamma.shape()),
                 Tensor<T>(p.gamma.shape())};
  for (int64_t c = 0; c < C; ++c) {
    const T rstd = T(1.0 / std::sqrt(double(p.var[c]) + p.eps));
    const T a = p.gamma[c] * rstd;
    T gg = 0, gb = 0;
    for (int64_t n = 0; n < N; ++n) {
      const int64_t off = (n * C + c) * S;
      for (int64_t s = 0; s < S; ++s) {
        const T g = grad_out[off + s];
        r.input[off + s] = g * a;
        gg += g * (x[off + s] - p.mean[c]) * rstd;
        gb += g;
      }
    }
    r.gamma[c] = gg;
    r.beta[c] = gb;
  }
  return r;
}

template <typename T>
Tensor<T> nearest_upsample(const Tensor<T>& x, int factor) {
  check(x.rank() == 4 && factor >= 1, ErrorCode::kShape,
        "nearest_upsample: input must be NCHW");
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t ho = H * factor, wo = W * factor;
  Tensor<T> out(Shape{N, C, ho, wo});
  for (int64_t p = 0; p < N * C; ++p) {
    const T* xp = x.ptr() + p * H * W;
    T* op = out.ptr() + p * ho * wo;
    for (int64_t oh = 0; oh < ho; ++oh)
      for (int64_t ow = 0; ow < wo; ++ow)
        op[oh * wo + ow] = xp[(oh / factor) * W + ow / factor];
  }
  return out;
}

template <typename T>
Tensor<T> nearest_upsample_backward(const Shape& x_shape, int factor,
                                    const Tensor<T>& grad_out) {
  const int64_t N = x_shape[0], C = x_shape[1], H = x_shape[2], W = x_shape[3];
  const int64_t ho = H * factor, wo = W * factor;
  Tensor<T> gx(x_shape);
  for (int64_t p = 0; p < N * C; ++p) {
    const T* gp = grad_out.ptr() + p * ho * wo;
    T* gxp = gx.ptr() + p * H * W;
    for (int64_t oh = 0; oh < ho; ++oh)
      for (int64_t ow = 0; ow < wo; ++ow)
        gxp[(oh / factor) * W + ow / factor] += gp[oh * wo + ow];
  }
  return gx;
}

template <typename T>
Tensor<T> space_to_channel(const Tensor<T>& x, int s) {
  check(x.rank() == 4 && s >= 1, ErrorCode::kShape,
        "space_to_channel: input must be NCHW");
  const int64_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (H % s != 0 || W % s != 0)
    fail(ErrorCode::kShape, "space_to_channel: spatial extents of " +
                                x.shape().str() + " not divisible by " +
                                std::to_string(s));
  const int64_t ho = H / s, wo = W / s;
  Tensor<T> out(Shape{N, C * s * s, ho, wo});
  for (int64_t n = 0; n < N; ++n)
    for (int64_t c = 0; c < C; ++c)
      for (int64_t i = 0; i < s; ++i)
        for (int64_t j = 0; j < s; ++j) {
          const int64_t oc = c * s * s + i * s + j;
          for (int64_t oh = 0; oh < ho; ++oh)
            for (int64_t ow = 0; ow < wo; ++ow)
              out.at(n, oc, oh, ow) = x.at(n, c, oh * s + i, ow * s + j);
        }
  return out;
}

template <typename T>
Tensor<T> channel_to_space(const Tensor<T>& y, int s) {
  check(y.rank() == 4 && s >= 1, ErrorCode::kShape,
        "channel_to_space: input must be NCHW");
  const int64_t N = y.dim(0), CS = y.dim(1), ho = y.dim(2), wo = y.dim(3);
  if (CS % (int64_t(s) * s) != 0)
    fail(ErrorCode::kShape, "channel_to_space: channels of " +
                                y.shape().str() + " not divisible by " +
                                std::to_string(s * s));
  const int64_t C = CS / (s * s);
  Tensor<T> out(Shape{N, C, ho * s, wo * s});
  for (int64_t n = 0; n < N; ++n)
    for (int64_t c = 0; c < C; ++c)
      for (int64_t i = 0; i < s; ++i)
        for (int64_t j = 0; j < s; ++j) {
          const int64_t ic = c * s * s + i * s + j;
          for (int64_t oh = 0; oh < ho; ++oh)
            for (int64_t ow = 0; ow < wo; ++ow)
              out.at(n, c, oh * s + i, ow * s + j) = y.at(n, ic, oh, ow);
        }
  return out;
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, bool trans_a,
                 bool trans_b) {
  check(a.rank() == 3 && b.rank() == 3 && a.dim(0) == b.dim(0),
        ErrorCode::kShape,
        "matmul: operands must be rank 3 with equal batch, got " +
            a.shape().str() + " and " + b.shape().str());
  const int64_t B = a.dim(0);
  const int64_t M = trans_a ? a.dim(2) : a.dim(1);
  const int64_t K = trans_a ? a.dim(1) : a.dim(2);
  const int64_t Kb = trans_b ? b.dim(2) : b.dim(1);
  const int64_t N = trans_b ? b.dim(1) : b.dim(2);
  if (K != Kb)
    fail(ErrorCode::kShape, "matmul: inner extents differ for " +
                                a.shape().str() + " and " + b.shape().str());
  Tensor<T> out(Shape{B, M, N});
  const int64_t as1 = trans_a ? 1 : K, as2 = trans_a ? M : 1;  // (m, k)
  const int64_t bs1 = trans_b ? 1 : N, bs2 = trans_b ? K : 1;  // (k, n)
  for (int64_t bt = 0; bt < B; ++bt) {
    const T* ap = a.ptr() + bt * M * K;
    const T* bp = b.ptr() + bt * K * N;
    T* op = out.ptr() + bt * M * N;
    for (int64_t m = 0; m < M; ++m)
      for (int64_t k = 0; k < K; ++k) {
        const T av = ap[m * as1 + k * as2];
        const T* brow = bp + k * bs1;
        T* orow = op + m * N;
        if (bs2 == 1) {
          for (int64_t n = 0; n < N; ++n) orow[n] += av * brow[n];
        } else {
          for (int64_t n = 0; n < N; ++n) orow[n] += av * brow[n * bs2];
        }
      }
  }
  return out;
}

#define ROC_INSTANTIATE(T)                                                    \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&,               \
                            const Tensor<T>*, const Conv2dGeometry&);         \
  template Conv2dGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&, \
                                          bool, const Conv2dGeometry&,        \
                                          const Tensor<T>&);                  \
  template Tensor<T> dwconv1d(const Tensor<T>&, const Tensor<T>&, Axis1d);    \
  template std::pair<Tensor<T>, Tensor<T>> dwconv1d_backward(                 \
      const Tensor<T>&, const Tensor<T>&, Axis1d, const Tensor<T>&);          \
  template Tensor<T> maxpool2d(const Tensor<T>&, int, int, int);              \
  template Tensor<T> maxpool2d_backward(const Tensor<T>&, int, int, int,      \
                                        const Tensor<T>&);                    \
  template Tensor<T> avgpool2d(const Tensor<T>&, int);                        \
  template Tensor<T> avgpool2d_backward(const Shape&, int, const Tensor<T>&); \
  template Tensor<T> sigmoid(const Tensor<T>&);                               \
  template Tensor<T> sigmoid_backward(const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> silu(const Tensor<T>&);                                  \
  template Tensor<T> silu_backward(const Tensor<T>&, const Tensor<T>&);       \
  template Tensor<T> softmax_lastdim(const Tensor<T>&);                       \
  template Tensor<T> softmax_lastdim_backward(const Tensor<T>&,               \
                                              const Tensor<T>&);              \
  template Tensor<T> group_norm(const Tensor<T>&, const Tensor<T>&,           \
                                const Tensor<T>&, int, double);               \
  template NormGrads<T> group_norm_backward(const Tensor<T>&,                 \
                                            const Tensor<T>&, int, double,    \
                                            const Tensor<T>&);                \
  template Tensor<T> batch_norm_infer(const Tensor<T>&,                       \
                                      const BatchNormParams<T>&);             \
  template NormGrads<T> batch_norm_infer_backward(                            \
      const Tensor<T>&, const BatchNormParams<T>&, const Tensor<T>&);         \
  template Tensor<T> nearest_upsample(const Tensor<T>&, int);                 \
  template Tensor<T> nearest_upsample_backward(const Shape&, int,             \
                                               const Tensor<T>&);             \
  template Tensor<T> space_to_channel(const Tensor<T>&, int);                 \
  template Tensor<T> channel_to_space(const Tensor<T>&, int);                 \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&, bool, bool);

ROC_INSTANTIATE(float)
ROC_INSTANTIATE(double)
#undef ROC_INSTANTIATE

}  // namespace roc
