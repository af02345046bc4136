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

#ifndef ROC_TENSOR_HPP_
#define ROC_TENSOR_HPP_

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "roc/error.hpp"

namespace roc {

enum class Precision { kF32, kF64 };

// Up to four extents, row-major. Feature maps use N, C, H, W.
class Shape {
 public:
  static constexpr int kMaxRank = 4;

  Shape() = default;
  Shape(std::initializer_list<int64_t> dims);
  explicit Shape(std::span<const int64_t> dims);

  int rank() const { return rank_; }
  int64_t operator[](int axis) const { return dims_[axis]; }
  int64_t numel() const;
  std::span<const int64_t> dims() const { return {dims_.data(), size_t(rank_)}; }

  // Left-pads with extent-1 axes up to `rank`.
  Shape padded_to(int rank) const;
  Shape with(int axis, int64_t extent) const;

  std::string str() const;

  friend bool operator==(const Shape& a, const Shape& b) {
    if (a.rank_ != b.rank_) return false;
    for (int i = 0; i < a.rank_; ++i)
      if (a.dims_[i] != b.dims_[i]) return false;
    return true;
  }

 private:
  int rank_ = 0;
  std::array<int64_t, kMaxRank> dims_{1, 1, 1, 1};
};

template <typename T>
class Tensor {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);

 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> data);

  static constexpr Precision precision() {
    return std::is_same_v<T, float> ? Precision::kF32 : Precision::kF64;
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return shape_.rank(); }
  int64_t dim(int axis) const { return shape_[axis]; }
  int64_t numel() const { return int64_t(data_.size()); }
  bool empty() const { return data_.empty(); }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }
  const std::vector<T>& vec() const { return data_; }
  T* ptr() { return data_.data(); }
  const T* ptr() const { return data_.data(); }

  T& operator[](int64_t i) { return data_[size_t(i)]; }
  T operator[](int64_t i) const { return data_[size_t(i)]; }

  // 4-D accessor, NCHW.
  T& at(int64_t n, int64_t c, int64_t h, int64_t w) {
    return data_[size_t(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }
  T at(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return data_[size_t(((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

// Elementwise product; `b` may broadcast into `a` by stretching extent-1
// axes (after left-padding `b` with 1s). Output shape is `a.shape()`.
template <typename T>
Tensor<T> elementwise_mul(const Tensor<T>& a, const Tensor<T>& b);

// Same broadcasting rule as elementwise_mul.
template <typename T>
Tensor<T> elementwise_add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor);

template <typename T>
Tensor<T> concat(std::span<const Tensor<T>> parts, int axis);

template <typename T>
Tensor<T> slice(const Tensor<T>& x, int axis, int64_t start, int64_t length);

template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& x, int axis, bool keepdim);

// Sum of `x` over every axis where `target` has extent 1 (after left-padding
// target to x's rank). Used to reduce broadcast gradients.
template <typename T>
Tensor<T> reduce_to_shape(const Tensor<T>& x, const Shape& target);

template <typename T>
Tensor<T> reshape_view(const Tensor<T>& x, const Shape& shape);

// True when `b` broadcasts into `a` under the extent-1 stretching rule.
bool broadcastable(const Shape& a, const Shape& b);

}  // namespace roc

#endif  // ROC_TENSOR_HPP_
