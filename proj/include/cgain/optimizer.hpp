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

#include <cmath>
#include <cstdint>
#include <vector>

#include "cgain/error.hpp"
#include "cgain/matrix.hpp"

namespace cgain {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Coupled L2: `weight_decay * param` is added to the gradient before the
  /// moment updates.
  double weight_decay = 0.0;
};

/// Bias-corrected Adam over a list of parameter blocks.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig config) : config_(config) {
    require(config_.learning_rate > 0.0, ErrorKind::kConfig, "learning rate must be positive");
    require(config_.weight_decay >= 0.0, ErrorKind::kConfig, "weight decay must be non-negative");
  }

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t steps() const noexcept { return step_; }
  const std::vector<Matrix>& first_moment() const noexcept { return m_; }
  const std::vector<Matrix>& second_moment() const noexcept { return v_; }

  void step(std::vector<Matrix>& params, const std::vector<Matrix>& grads) {
    require(params.size() == grads.size(), ErrorKind::kShape, "adam: parameter/gradient count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      require_same_shape(params[i], grads[i], "adam gradient");
      require(grads[i].all_finite(), ErrorKind::kNumeric, "adam: non-finite gradient");
    }
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.rows(), p.cols(), 0.0);
        v_.emplace_back(p.rows(), p.cols(), 0.0);
      }
    }
    require(m_.size() == params.size(), ErrorKind::kShape, "adam: state does not match parameters");
    ++step_;
    const double t = static_cast<double>(step_);
    const double bc1 = 1.0 - std::pow(config_.beta1, t);
    const double bc2 = 1.0 - std::pow(config_.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      require_same_shape(params[i], m_[i], "adam state");
      auto p = params[i].flat();
      auto g = grads[i].flat();
      auto m = m_[i].flat();
      auto v = v_[i].flat();
      for (std::size_t k = 0; k < p.size(); ++k) {
        const double grad = g[k] + config_.weight_decay * p[k];
        m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * grad;
        v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * grad * grad;
        const double m_hat = m[k] / bc1;
        const double v_hat = v[k] / bc2;
        p[k] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
      }
    }
  }

  void restore(std::uint64_t steps, std::vector<Matrix> m, std::vector<Matrix> v) {
    step_ = steps;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  AdamConfig config_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::uint64_t step_ = 0;
};

}  // namespace cgain
