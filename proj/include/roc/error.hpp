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

#ifndef ROC_ERROR_HPP_
#define ROC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace roc {

enum class ErrorCode {
  kShape,            // incompatible or invalid tensor shapes
  kInvalidArgument,  // bad configuration or argument value
  kIo,               // file could not be opened / read / written
  kFormat,           // malformed file content
  kMissingWeight,    // weight store lacks a slot required by the graph
  kUnsupported,      // op without a backward rule reached during backward
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void check(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace roc

#endif  // ROC_ERROR_HPP_
