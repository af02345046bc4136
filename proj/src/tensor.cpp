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

#include "roc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace roc {

Shape::Shape(std::initializer_list<int64_t> dims)
    : Shape(std::span<const int64_t>(dims.begin(), dims.size())) {}

Shape::Shape(std::span<const int64_t> dims) {
  check(!dims.empty() && dims.size() <= size_t(kMaxRank), ErrorCode::kShape,
        "tensor rank must be 1..4");
  rank_ = int(dims.size());
  for (int i = 0; i < rank_; ++i) {
    check(dims[i] >= 1, ErrorCode::kShape, "tensor extents must be >= 1");
    dims_[i] = dims[i];
  }
}

int64_t Shape::numel() const {
  if (rank_ == 0) return 0;
  int64_t n = 1;
  for (int i = 0; i < rank_; ++i) n *= dims_[i];
  return n;
}

Shape Shape::padded_to(int rank) const {
  if (rank <= rank_) return *this;
  std::array<int64_t, kMaxRank> d{1, 1, 1, 1};
  const int off = rank - rank_;
  for (int i = 0; i < rank_; ++i) d[off + i] = dims_[i];
  return Shape(std::span<const int64_t>(d.data(), size_t(rank)));
}

Shape Shape::with(int axis, int64_t extent) const {
  std::array<int64_t, kMaxRank> d = dims_;
  d[axis] = extent;
  return Shape(std::span<const int64_t>(d.data(), size_t(rank_)));
}

std::string Shape::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < rank_; ++i) os << (i ? "," : "") << dims_[i];
  os << ')';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill)
    : shape_(shape), data_(size_t(shape.numel()), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data)
    : shape_(shape), data_(std::move(data)) {
  check(int64_t(data_.size()) == shape_.numel(), ErrorCode::kShape,
        "element count " + std::to_string(data_.size()) +
            " does not match shape " + shape_.str());
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](T v) { return std::isfinite(v); });
}

bool broadcastable(const Shape& a, const Shape& b) {
  if (b.rank() > a.rank()) return false;
  const Shape bp = b.padded_to(a.rank());
  for (int i = 0; i < a.rank(); ++i)
    if (bp[i] != 1 && bp[i] != a[i]) return false;
  return true;
}

namespace {

// Flat index into a broadcast operand for every element of `a`'s shape.
// Strides of stretched axes are zero.
std::array<int64_t, 4> broadcast_strides(const Shape& a, const Shape& b) {
  const Shape bp = b.padded_to(a.rank());
  std::array<int64_t, 4> strides{0, 0, 0, 0};
  int64_t s = 1;
  for (int i = a.rank() - 1; i >= 0; --i) {
    strides[i] = bp[i] == 1 ? 0 : s;
    s *= bp[i];
  }
  return strides;
}

template <typename T, typename F>
Tensor<T> broadcast_binary(const Tensor<T>& a, const Tensor<T>& b, F f,
                           const char* name) {
  if (!broadcastable(a.shape(), b.shape()))
    fail(ErrorCode::kShape, std::string(name) + ": shape " + b.shape().str() +
                                " does not broadcast to " + a.shape().str());
  Tensor<T> out(a.shape());
  if (a.shape() == b.shape()) {
    for (int64_t i = 0; i < a.numel(); ++i) out[i] = f(a[i], b[i]);
    return out;
  }
  const Shape ap = a.shape().padded_to(4);
  const auto st = broadcast_strides(ap, b.shape());
  int64_t i = 0;
  for (int64_t d0 = 0; d0 < ap[0]; ++d0)
    for (int64_t d1 = 0; d1 < ap[1]; ++d1)
      for (int64_t d2 = 0; d2 < ap[2]; ++d2) {
        const int64_t base = d0 * st[0] + d1 * st[1] + d2 * st[2];
        for (int64_t d3 = 0; d3 < ap[3]; ++d3, ++i)
          out[i] = f(a[i], b[base + d3 * st[3]]);
      }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> elementwise_mul(const Tensor<T>& a, const Tensor<T>& b) {
  return broadcast_binary(a, b, [](T x, T y) { return x * y; },
                          "elementwise_mul");
}

template <typename T>
Tensor<T> elementwise_add(const Tensor<T>& a, const Tensor<T>& b) {
  return broadcast_binary(a, b, [](T x, T y) { return x + y; },
                          "elementwise_add");
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  Tensor<T> out = a;
  for (auto& v : out.data()) v *= factor;
  return out;
}

template <typename T>
Tensor<T> concat(std::span<const Tensor<T>> parts, int axis) {
  check(!parts.empty(), ErrorCode::kShape, "concat of zero tensors");
  const Shape& s0 = parts[0].shape();
  check(axis >= 0 && axis < s0.rank(), ErrorCode::kShape,
        "concat axis out of range");
  int64_t total = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.rank() == s0.rank();
    for (int i = 0; ok && i < s0.rank(); ++i)
      if (i != axis && s[i] != s0[i]) ok = false;
    if (!ok)
      fail(ErrorCode::kShape, "concat: shape " + s.str() +
                                  " incompatible with " + s0.str() +
                                  " on axis " + std::to_string(axis));
    total += s[axis];
  }
  const Shape out_shape = s0.with(axis, total);
  int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= s0[i];
  for (int i = axis + 1; i < s0.rank(); ++i) inner *= s0[i];
  Tensor<T> out(out_shape);
  T* dst = out.ptr();
  for (int64_t o = 0; o < outer; ++o)
    for (const auto& p : parts) {
      const int64_t n = p.dim(axis) * inner;
      std::copy_n(p.ptr() + o * n, n, dst);
      dst += n;
    }
  return out;
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, int axis, int64_t start, int64_t length) {
  const Shape& s = x.shape();
  check(axis >= 0 && axis < s.rank(), ErrorCode::kShape,
        "slice axis out of range");
  check(start >= 0 && length >= 1 && start + length <= s[axis],
        ErrorCode::kShape, "slice range out of bounds for " + s.str());
  int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= s[i];
  for (int i = axis + 1; i < s.rank(); ++i) inner *= s[i];
  Tensor<T> out(s.with(axis, length));
  for (int64_t o = 0; o < outer; ++o)
    std::copy_n(x.ptr() + (o * s[axis] + start) * inner, length * inner,
                out.ptr() + o * length * inner);
  return out;
}

template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& x, int axis, bool keepdim) {
  const Shape& s = x.shape();
  check(axis >= 0 && axis < s.rank(), ErrorCode::kShape,
        "reduce_mean: axis " + std::to_string(axis) + " out of range for " +
            s.str());
  int64_t outer = 1, inner = 1;
  const int64_t m = s[axis];
  for (int i = 0; i < axis; ++i) outer *= s[i];
  for (int i = axis + 1; i < s.rank(); ++i) inner *= s[i];

  Shape out_shape = s.with(axis, 1);
  if (!keepdim && s.rank() > 1) {
    std::vector<int64_t> d;
    for (int i = 0; i < s.rank(); ++i)
      if (i != axis) d.push_back(s[i]);
    out_shape = Shape(std::span<const int64_t>(d));
  }
  Tensor<T> out(out_shape);
  const T inv = T(1) / T(m);
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t j = 0; j < inner; ++j) {
      T acc = 0;
      for (int64_t k = 0; k < m; ++k) acc += x[(o * m + k) * inner + j];
      out[o * inner + j] = acc * inv;
    }
  return out;
}

template <typename T>
Tensor<T> reduce_to_shape(const Tensor<T>& x, const Shape& target) {
  if (x.shape() == target) return x;
  check(broadcastable(x.shape(), target), ErrorCode::kShape,
        "reduce_to_shape: " + target.str() + " not broadcastable to " +
            x.shape().str());
  const Shape xp = x.shape().padded_to(4);
  const auto st = broadcast_strides(xp, target);
  Tensor<T> out(target);
  int64_t i = 0;
  for (int64_t d0 = 0; d0 < xp[0]; ++d0)
    for (int64_t d1 = 0; d1 < xp[1]; ++d1)
      for (int64_t d2 = 0; d2 < xp[2]; ++d2) {
        const int64_t base = d0 * st[0] + d1 * st[1] + d2 * st[2];
        for (int64_t d3 = 0; d3 < xp[3]; ++d3, ++i)
          out[base + d3 * st[3]] += x[i];
      }
  return out;
}

template <typename T>
Tensor<T> reshape_view(const Tensor<T>& x, const Shape& shape) {
  if (shape.numel() != x.numel())
    fail(ErrorCode::kShape, "reshape: cannot view " + x.shape().str() +
                                " as " + shape.str());
  return Tensor<T>(shape, x.vec());
}

#define ROC_INSTANTIATE(T)                                                   \
  template class Tensor<T>;                                                  \
  template Tensor<T> elementwise_mul(const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> elementwise_add(const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> scale(const Tensor<T>&, T);                             \
  template Tensor<T> concat(std::span<const Tensor<T>>, int);                \
  template Tensor<T> slice(const Tensor<T>&, int, int64_t, int64_t);         \
  template Tensor<T> reduce_mean(const Tensor<T>&, int, bool);               \
  template Tensor<T> reduce_to_shape(const Tensor<T>&, const Shape&);        \
  template Tensor<T> reshape_view(const Tensor<T>&, const Shape&);

ROC_INSTANTIATE(float)
ROC_INSTANTIATE(double)
#undef ROC_INSTANTIATE

}  // namespace roc
