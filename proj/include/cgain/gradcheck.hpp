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

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cgain/error.hpp"
#include "cgain/matrix.hpp"
#include "cgain/nn.hpp"

namespace cgain {

/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

/// Compares `analytic` against central differences of `loss` over every
/// entry of `params`. `loss` must read the current contents of `params`.
/// Each entry is restored exactly after probing.
inline double max_relative_gradient_error(std::vector<Matrix*> params, const std::function<double()>& loss,
                                          const std::vector<Matrix>& analytic, double eps) {
  require(params.size() == analytic.size(), ErrorKind::kShape, "grad check: block count mismatch");
  double worst = 0.0;
  for (std::size_t b = 0; b < params.size(); ++b) {
    require_same_shape(*params[b], analytic[b], "grad check block");
    for (std::size_t k = 0; k < params[b]->size(); ++k) {
      double& value = (*params[b])[k];
      const double saved = value;
      value = saved + eps;
      const double up = loss();
      value = saved - eps;
      const double down = loss();
      value = saved;
      const double numeric = (up - down) / (2.0 * eps);
      worst = std::max(worst, relative_error(analytic[b][k], numeric));
    }
  }
  return worst;
}

/// Scalar loss of a network output together with its gradient.
struct OutputLoss {
  std::function<double(const Matrix&)> value;
  std::function<Matrix(const Matrix&)> gradient;
};

/// Gradient check of `net` in training mode with a fixed dropout seed, so
/// every probe sees the same dropout masks.
inline double grad_check(Network& net, const OutputLoss& loss, const Matrix& batch, double eps,
                         std::uint64_t dropout_seed = 0) {
  ForwardCache cache;
  const Matrix out = net.forward(batch, Mode::kTrain, dropout_seed, &cache);
  const Backprop grads = net.backward(cache, loss.gradient(out));
  std::vector<Matrix*> blocks;
  for (auto& p : net.mutable_parameters()) blocks.push_back(&p);
  const auto probe = [&] { return loss.value(net.forward(batch, Mode::kTrain, dropout_seed)); };
  return max_relative_gradient_error(blocks, probe, grads.params, eps);
}

}  // namespace cgain
