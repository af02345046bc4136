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

#include "roc/autograd.hpp"

#include <cmath>

namespace roc {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConv2d: return "conv2d";
    case OpKind::kDwConv1d: return "dwconv1d";
    case OpKind::kMaxPool: return "maxpool2d";
    case OpKind::kAvgPool: return "avgpool2d";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kSilu: return "silu";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kGroupNorm: return "group_norm";
    case OpKind::kBatchNorm: return "batch_norm";
    case OpKind::kMul: return "mul";
    case OpKind::kAdd: return "add";
    case OpKind::kScale: return "scale";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kReduceMean: return "reduce_mean";
    case OpKind::kReshape: return "reshape";
    case OpKind::kSpaceToChannel: return "space_to_channel";
    case OpKind::kMatmul: return "matmul";
    case OpKind::kUpsample: return "upsample";
    case OpKind::kCustom: return "custom";
  }
  return "?";
}

template <typename T>
Var Tape<T>::push(OpKind kind, Tensor<T> value, std::vector<int> inputs,
                  BackwardFn backward, std::string name) {
  Node n;
  n.kind = kind;
  n.name = std::move(name);
  n.value = std::move(value);
  for (int i : inputs) n.requires_grad |= nodes_[size_t(i)].requires_grad;
  n.inputs = std::move(inputs);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{int(nodes_.size()) - 1};
}

template <typename T>
Var Tape<T>::leaf(Tensor<T> value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{int(nodes_.size()) - 1};
}

template <typename T>
Var Tape<T>::add_param(const std::string& name, Tensor<T> value,
                       bool learnable) {
  check(!has(name), ErrorCode::kInvalidArgument,
        "duplicate parameter slot '" + name + "'");
  Var v = leaf(std::move(value), learnable);
  nodes_.back().name = name;
  params_.emplace(name, v);
  param_order_.emplace_back(name, v);
  return v;
}

template <typename T>
Var Tape<T>::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end())
    fail(ErrorCode::kMissingWeight, "missing parameter slot '" + name + "'");
  return it->second;
}

template <typename T>
void Tape<T>::load_params(
    const TensorStore<T>& store,
    const std::function<bool(const std::string&)>& learnable) {
  for (const auto& [name, t] : store.entries()) add_param(name, t, learnable(name));
}

template <typename T>
Tensor<T> Tape<T>::grad(Var v) const {
  const Node& n = nodes_.at(size_t(v.id));
  if (n.grad.empty()) return Tensor<T>(n.value.shape());
  return n.grad;
}

template <typename T>
void Tape<T>::zero_grad() {
  for (auto& n : nodes_) n.grad = Tensor<T>();
}

template <typename T>
void Tape<T>::backward(Var out, const Tensor<T>& seed) {
  check(seed.shape() == shape(out), ErrorCode::kShape,
        "backward: seed shape " + seed.shape().str() +
            " does not match output " + shape(out).str());
  zero_grad();
  nodes_[size_t(out.id)].grad = seed;
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[size_t(i)];
    if (n.grad.empty() || !n.requires_grad || n.kind == OpKind::kLeaf) continue;
    if (!n.backward)
      fail(ErrorCode::kUnsupported,
           std::string("backward: unsupported op on tape: ") +
               (n.name.empty() ? op_name(n.kind) : n.name));
    std::vector<Tensor<T>> grads = n.backward(n.grad);
    const bool flip = flipped_ && *flipped_ == n.kind;
    for (size_t j = 0; j < n.inputs.size() && j < grads.size(); ++j) {
      Tensor<T>& g = grads[j];
      if (g.empty()) continue;
      Node& in = nodes_[size_t(n.inputs[j])];
      if (!in.requires_grad) continue;
      if (flip)
        for (auto& v : g.data()) v = -v;
      if (in.grad.empty()) {
        in.grad = std::move(g);
      } else {
        for (int64_t k = 0; k < g.numel(); ++k) in.grad[k] += g[k];
      }
    }
  }
}

template <typename T>
Var Tape<T>::conv2d(Var x, Var w, const std::optional<Var>& b,
                    Conv2dGeometry g) {
  const Tensor<T>* bias = b ? &value(*b) : nullptr;
  Tensor<T> out = roc::conv2d(value(x), value(w), bias, g);
  std::vector<int> in{x.id, w.id};
  if (b) in.push_back(b->id);
  const bool has_bias = b.has_value();
  return push(OpKind::kConv2d, std::move(out), in,
              [this, x, w, has_bias, g](const Tensor<T>& go) {
                auto r = conv2d_backward(value(x), value(w), has_bias, g, go);
                std::vector<Tensor<T>> v{std::move(r.input), std::move(r.weight)};
                if (has_bias) v.push_back(std::move(*r.bias));
                return v;
              });
}

template <typename T>
Var Tape<T>::dwconv1d(Var x, Var w, Axis1d axis) {
  return push(OpKind::kDwConv1d, roc::dwconv1d(value(x), value(w), axis),
              {x.id, w.id}, [this, x, w, axis](const Tensor<T>& go) {
                auto [gx, gw] = dwconv1d_backward(value(x), value(w), axis, go);
                return std::vector<Tensor<T>>{std::move(gx), std::move(gw)};
              });
}

template <typename T>
Var Tape<T>::maxpool2d(Var x, int k, int stride, int pad) {
  return push(OpKind::kMaxPool, roc::maxpool2d(value(x), k, stride, pad),
              {x.id}, [this, x, k, stride, pad](const Tensor<T>& go) {
                return std::vector<Tensor<T>>{
                    maxpool2d_backward(value(x), k, stride, pad, go)};
              });
}

template <typename T>
Var Tape<T>::avgpool2d(Var x, int k) {
  const Shape xs = shape(x);
  return push(OpKind::kAvgPool, roc::avgpool2d(value(x), k), {x.id},
              [xs, k](const Tensor<T>& go) {
                return std::vector<Tensor<T>>{avgpool2d_backward(xs, k, go)};
              });
}

template <typename T>
Var Tape<T>::sigmoid(Var x) {
  Var out = push(OpKind::kSigmoid, roc::sigmoid(value(x)), {x.id}, nullptr);
  nodes_.back().backward = [this, out](const Tensor<T>& go) {
    return std::vector<Tensor<T>>{sigmoid_backward(value(out), go)};
  };
  return out;
}

template <typename T>
Var Tape<T>::silu(Var x) {
  return push(OpKind::kSilu, roc::silu(value(x)), {x.id},
              [this, x](const Tensor<T>& go) {
                return std::vector<Tensor<T>>{silu_backward(value(x), go)};
              });
}

template <typename T>
Var Tape<T>::softmax_lastdim(Var x) {
  Var out = push(OpKind::kSoftmax, roc::softmax_lastdim(value(x)), {x.id}, nullptr);
  nodes_.back().backward = [this, out](const Tensor<T>& go) {
    return std::vector<Tensor<T>>{softmax_lastdim_backward(value(out), go)};
  };
  return out;
}

template <typename T>
Var Tape<T>::group_norm(Var x, Var gamma, Var beta, int groups, double eps) {
  return push(OpKind::kGroupNorm,
              roc::group_norm(value(x), value(gamma), value(beta), groups, eps),
              {x.id, gamma.id, beta.id},
              [this, x, gamma, groups, eps](const Tensor<T>& go) {
                auto r = group_norm_backward(value(x), value(gamma), groups, eps, go);
                return std::vector<Tensor<T>>{std::move(r.input), std::move(r.gamma),
                                              std::move(r.beta)};
              });
}

template <typename T>
Var Tape<T>::batch_norm(Var x, Var gamma, Var beta, Var mean, Var var,
                        double eps) {
  auto params = [this, gamma, beta, mean, var, eps] {
    return BatchNormParams<T>{value(gamma), value(beta), value(mean), value(var), eps};
  };
  return push(OpKind::kBatchNorm, batch_norm_infer(value(x), params()),
              {x.id, gamma.id, beta.id},
              [this, x, params](const Tensor<T>& go) {
                auto r = batch_norm_infer_backward(value(x), params(), go);
                return std::vector<Tensor<T>>{std::move(r.input), std::move(r.gamma),
                                              std::move(r.beta)};
              });
}

template <typename T>
Var Tape<T>::mul(Var a, Var b) {
  return push(OpKind::kMul, elementwise_mul(value(a), value(b)), {a.id, b.id},
              [this, a, b](const Tensor<T>& go) {
                Tensor<T> ga = elementwise_mul(go, value(b));
                Tensor<T> gb = reduce_to_shape(elementwise_mul(go, value(a)),
                                               shape(b));
                return std::vector<Tensor<T>>{std::move(ga), std::move(gb)};
              });
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  const Shape bs = shape(b);
  return push(OpKind::kAdd, elementwise_add(value(a), value(b)), {a.id, b.id},
              [bs](const Tensor<T>& go) {
                return std::vector<Tensor<T>>{go, reduce_to_shape(go, bs)};
              });
}

template <typename T>
Var Tape<T>::scale(Var a, T factor) {
  return push(OpKind::kScale, roc::scale(value(a), factor), {a.id},
              [factor](const Tensor<T>& go) {
                return std::vector<Tensor<T>>{roc::scale(go, factor)};
              });
}

template <typename T>
Var Tape<T>::concat(std::span<const Var> xs, int axis) {
  std::vector<Tensor<T>> parts;
  std::vector<int> ids;
  std::vector<int64_t> extents;
  for (Var v : xs) {
    parts.push_back(value(v));
    ids.push_back(v.id);
    extents.push_back(shape(v)[axis]);
  }
  return push(OpKind::kConcat,
              roc::concat(std::span<const Tensor<T>>(parts), axis), ids,
              [axis, extents](const Tensor<T>& go) {
                std::vector<Tensor<T>> gs;
                int64_t off = 0;
                for (int64_t e : extents) {
                  gs.push_back(roc::slice(go, axis, off, e));
                  off += e;
                }
                return gs;
              });
}

template <typename T>
Var Tape<T>::slice(Var x, int axis, int64_t start, int64_t length) {
  const Shape xs = shape(x);
  return push(OpKind::kSlice, roc::slice(value(x), axis, start, length),
              {x.id}, [xs, axis, start, length](const Tensor<T>& go) {
                Tensor<T> gx(xs);
                int64_t outer = 1, inner = 1;
                for (int i = 0; i < axis; ++i) outer *= xs[i];
                for (int i = axis + 1; i < xs.rank(); ++i) inner *= xs[i];
                for (int64_t o = 0; o < outer; ++o)
                  std::copy_n(go.ptr() + o * length * inner, length * inner,
                              gx.ptr() + (o * xs[axis] + start) * inner);
                return std::vector<Tensor<T>>{std::move(gx)};
              });
}

template <typename T>
Var Tape<T>::reduce_mean(Var x, int axis, bool keepdim) {
  const Shape xs = shape(x);
  return push(OpKind::kReduceMean, roc::reduce_mean(value(x), axis, keepdim),
              {x.id}, [xs, axis](const Tensor<T>& go) {
                const int64_t m = xs[axis];
                Tensor<T> g = reshape_view(go, xs.with(axis, 1));
                Tensor<T> gx(xs, T(1) / T(m));
                return std::vector<Tensor<T>>{elementwise_mul(gx, g)};
              });
}

template <typename T>
Var Tape<T>::reshape(Var x, const Shape& s) {
  const Shape xs = shape(x);
  return push(OpKind::kReshape, reshape_view(value(x), s), {x.id},
              [xs](const Tensor<T>& go) {
                return std::vector<Tensor<T>>{reshape_view(go, xs)};
              });
}

template <typename T>
Var Tape<T>::space_to_channel(Var x, int s) {
  return push(OpKind::kSpaceToChannel, roc::space_to_channel(value(x), s),
              {x.id}, [s](const Tensor<T>& go) {
                return std::vector<Tensor<T>>{channel_to_space(go, s)};
              });
}

template <typename T>
Var Tape<T>::matmul(Var a, Var b, bool ta, bool tb) {
  return push(OpKind::kMatmul, roc::matmul(value(a), value(b), ta, tb),
              {a.id, b.id}, [this, a, b, ta, tb](const Tensor<T>& go) {
                const Tensor<T>& A = value(a);
                const Tensor<T>& B = value(b);
                Tensor<T> ga, gb;
                if (!ta && !tb) {
                  ga = roc::matmul(go, B, false, true);
                  gb = roc::matmul(A, go, true, false);
                } else if (ta && !tb) {
                  ga = roc::matmul(B, go, false, true);
                  gb = roc::matmul(A, go, false, false);
                } else if (!ta && tb) {
                  ga = roc::matmul(go, B, false, false);
                  gb = roc::matmul(go, A, true, false);
                } else {
                  ga = roc::matmul(B, go, true, true);
                  gb = roc::matmul(go, A, true, true);
                }
                return std::vector<Tensor<T>>{std::move(ga), std::move(gb)};
              });
}

template <typename T>
Var Tape<T>::upsample(Var x, int factor) {
  const Shape xs = shape(x);
  return push(OpKind::kUpsample, nearest_upsample(value(x), factor), {x.id},
              [xs, factor](const Tensor<T>& go) {
                return std::vector<Tensor<T>>{
                    nearest_upsample_backward(xs, factor, go)};
              });
}

template <typename T>
Var Tape<T>::custom(const std::string& name, std::vector<Var> inputs,
                    Tensor<T> value, BackwardFn backward) {
  std::vector<int> ids;
  for (Var v : inputs) ids.push_back(v.id);
  return push(OpKind::kCustom, std::move(value), ids, std::move(backward), name);
}

template class Tape<float>;
template class Tape<double>;

}  // namespace roc
