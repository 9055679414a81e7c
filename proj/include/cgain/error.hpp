// Copyright 2026 The cgain Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace cgain {

enum class ErrorKind {
  kShape,
  kNumeric,
  kState,
  kConfig,
  kData,
  kIngestion,
  kUsage,
  kMetricUndefined,
  kDivision,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape: return "shape error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kState: return "state error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kIngestion: return "ingestion error";
    case ErrorKind::kUsage: return "usage error";
    case ErrorKind::kMetricUndefined: return "metric undefined";
    case ErrorKind::kDivision: return "division error";
  }
  return "error";
}

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

/// 0 success, 2 config or usage error, 3 data error, 4 numeric failure,
/// 1 anything else.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kUsage: return 2;
    case ErrorKind::kData:
    case ErrorKind::kIngestion: return 3;
    case ErrorKind::kNumeric: return 4;
    default: return 1;
  }
}

}  // namespace cgain
