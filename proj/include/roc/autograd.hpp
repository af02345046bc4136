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

#ifndef ROC_AUTOGRAD_HPP_
#define ROC_AUTOGRAD_HPP_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "roc/nn_ops.hpp"
#include "roc/tensor_store.hpp"

namespace roc {

enum class OpKind {
  kLeaf,
  kConv2d,
  kDwConv1d,
  kMaxPool,
  kAvgPool,
  kSigmoid,
  kSilu,
  kSoftmax,
  kGroupNorm,
  kBatchNorm,
  kMul,
  kAdd,
  kScale,
  kConcat,
  kSlice,
  kReduceMean,
  kReshape,
  kSpaceToChannel,
  kMatmul,
  kUpsample,
  kCustom,
};

const char* op_name(OpKind kind);

struct Var {
  int id = -1;
};

// Reverse-mode tape. Every op evaluates eagerly and records a closure that
// maps the output gradient to input gradients. Single-threaded per tape.
template <typename T>
class Tape {
 public:
  using Value = Var;
  using Scalar = T;
  // Receives the output gradient; returns one gradient per input (an empty
  // tensor means "no contribution").
  using BackwardFn =
      std::function<std::vector<Tensor<T>>(const Tensor<T>& grad_out)>;

  Var leaf(Tensor<T> value, bool requires_grad = true);
  Var constant(Tensor<T> value) { return leaf(std::move(value), false); }

  // Named parameter slots, looked up by the generic block code.
  Var add_param(const std::string& name, Tensor<T> value, bool learnable);
  Var param(const std::string& name) const;
  bool has(const std::string& name) const { return params_.count(name) != 0; }
  const std::vector<std::pair<std::string, Var>>& named_params() const {
    return param_order_;
  }
  void load_params(const TensorStore<T>& store,
                   const std::function<bool(const std::string&)>& learnable);

  const Tensor<T>& value(Var v) const { return nodes_.at(size_t(v.id)).value; }
  const Shape& shape(Var v) const { return value(v).shape(); }
  // Gradient accumulated by the last backward(); zeros when unreached.
  Tensor<T> grad(Var v) const;
  OpKind kind(Var v) const { return nodes_.at(size_t(v.id)).kind; }
  size_t size() const { return nodes_.size(); }

  void backward(Var out, const Tensor<T>& seed);
  void zero_grad();

  // Test hook: negates every gradient produced by ops of `kind`.
  void inject_sign_flip(OpKind kind) { flipped_ = kind; }

  Var conv2d(Var x, Var w, const std::optional<Var>& b, Conv2dGeometry g);
  Var dwconv1d(Var x, Var w, Axis1d axis);
  Var maxpool2d(Var x, int k, int stride, int pad);
  Var avgpool2d(Var x, int k);
  Var sigmoid(Var x);
  Var silu(Var x);
  Var softmax_lastdim(Var x);
  Var group_norm(Var x, Var gamma, Var beta, int groups, double eps);
  Var batch_norm(Var x, Var gamma, Var beta, Var mean, Var var, double eps);
  Var mul(Var a, Var b);
  Var add(Var a, Var b);
  Var scale(Var a, T factor);
  Var concat(std::span<const Var> xs, int axis);
  Var slice(Var x, int axis, int64_t start, int64_t length);
  Var reduce_mean(Var x, int axis, bool keepdim);
  Var reshape(Var x, const Shape& shape);
  Var space_to_channel(Var x, int s);
  Var matmul(Var a, Var b, bool trans_a, bool trans_b);
  Var upsample(Var x, int factor);
  // Externally computed op. Without a backward rule, reaching it during
  // backward() raises ErrorCode::kUnsupported.
  Var custom(const std::string& name, std::vector<Var> inputs,
             Tensor<T> value, BackwardFn backward = nullptr);

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    std::vector<int> inputs;
    BackwardFn backward;
  };

  Var push(OpKind kind, Tensor<T> value, std::vector<int> inputs,
           BackwardFn backward, std::string name = {});

  std::vector<Node> nodes_;
  std::unordered_map<std::string, Var> params_;
  std::vector<std::pair<std::string, Var>> param_order_;
  std::optional<OpKind> flipped_;
};

// Same op surface as Tape but evaluates directly on tensors, with parameters
// resolved from a store.
template <typename T>
class EagerOps {
 public:
  using Value = Tensor<T>;
  using Scalar = T;

  explicit EagerOps(const TensorStore<T>& store) : store_(&store) {}

  const Tensor<T>& param(const std::string& name) const { return store_->get(name); }
  bool has(const std::string& name) const { return store_->contains(name); }
  const Tensor<T>& value(const Tensor<T>& v) const { return v; }
  const Shape& shape(const Tensor<T>& v) const { return v.shape(); }

  Value conv2d(const Value& x, const Value& w, const std::optional<Value>& b,
               Conv2dGeometry g) {
    return roc::conv2d(x, w, b ? &*b : nullptr, g);
  }
  Value dwconv1d(const Value& x, const Value& w, Axis1d axis) {
    return roc::dwconv1d(x, w, axis);
  }
  Value maxpool2d(const Value& x, int k, int s, int p) { return roc::maxpool2d(x, k, s, p); }
  Value avgpool2d(const Value& x, int k) { return roc::avgpool2d(x, k); }
  Value sigmoid(const Value& x) { return roc::sigmoid(x); }
  Value silu(const Value& x) { return roc::silu(x); }
  Value softmax_lastdim(const Value& x) { return roc::softmax_lastdim(x); }
  Value group_norm(const Value& x, const Value& g, const Value& b, int groups,
                   double eps) {
    return roc::group_norm(x, g, b, groups, eps);
  }
  Value batch_norm(const Value& x, const Value& g, const Value& b,
                   const Value& mean, const Value& var, double eps) {
    return roc::batch_norm_infer(x, BatchNormParams<T>{g, b, mean, var, eps});
  }
  Value mul(const Value& a, const Value& b) { return elementwise_mul(a, b); }
  Value add(const Value& a, const Value& b) { return elementwise_add(a, b); }
  Value scale(const Value& a, T f) { return roc::scale(a, f); }
  Value concat(std::span<const Value> xs, int axis) { return roc::concat(xs, axis); }
  Value slice(const Value& x, int axis, int64_t start, int64_t len) {
    return roc::slice(x, axis, start, len);
  }
  Value reduce_mean(const Value& x, int axis, bool keepdim) {
    return roc::reduce_mean(x, axis, keepdim);
  }
  Value reshape(const Value& x, const Shape& s) { return reshape_view(x, s); }
  Value space_to_channel(const Value& x, int s) { return roc::space_to_channel(x, s); }
  Value matmul(const Value& a, const Value& b, bool ta, bool tb) {
    return roc::matmul(a, b, ta, tb);
  }
  Value upsample(const Value& x, int f) { return nearest_upsample(x, f); }

 private:
  const TensorStore<T>* store_;
};

}  // namespace roc

#endif  // ROC_AUTOGRAD_HPP_
