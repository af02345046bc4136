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

#ifndef ROC_TENSOR_STORE_HPP_
#define ROC_TENSOR_STORE_HPP_

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "roc/tensor.hpp"

namespace roc {

// Insertion-ordered map from slot name to tensor.
template <typename T>
class TensorStore {
 public:
  using Entry = std::pair<std::string, Tensor<T>>;

  void set(const std::string& name, Tensor<T> value) {
    auto it = index_.find(name);
    if (it != index_.end()) {
      entries_[it->second].second = std::move(value);
      return;
    }
    index_.emplace(name, entries_.size());
    entries_.emplace_back(name, std::move(value));
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const Tensor<T>& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
      fail(ErrorCode::kMissingWeight, "missing weight slot '" + name + "'");
    return entries_[it->second].second;
  }

  Tensor<T>& get_mut(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end())
      fail(ErrorCode::kMissingWeight, "missing weight slot '" + name + "'");
    return entries_[it->second].second;
  }

  void erase(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) return;
    entries_.erase(entries_.begin() + std::ptrdiff_t(it->second));
    reindex();
  }

  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  int64_t total_elements() const {
    int64_t n = 0;
    for (const auto& e : entries_) n += e.second.numel();
    return n;
  }

  template <typename U>
  TensorStore<U> cast() const {
    TensorStore<U> out;
    for (const auto& [name, t] : entries_) out.set(name, t.template cast<U>());
    return out;
  }

 private:
  void reindex() {
    index_.clear();
    for (size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].first, i);
  }

  std::vector<Entry> entries_;
  std::unordered_map<std::string, size_t> index_;
};

using WeightStore = TensorStore<float>;

}  // namespace roc

#endif  // ROC_TENSOR_STORE_HPP_
