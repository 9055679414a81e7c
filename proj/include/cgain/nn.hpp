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
#include <string>
#include <vector>

#include "cgain/error.hpp"
#include "cgain/matrix.hpp"
#include "cgain/rng.hpp"

namespace cgain {

inline constexpr double kBatchNormEpsilon = 1e-8;
/// Running statistics: running = momentum * running + (1 - momentum) * batch.
inline constexpr double kBatchNormMomentum = 0.9;

/// Two-hidden-layer perceptron shape shared by generator, classifier and
/// discriminator.
struct NetworkSpec {
  std::size_t input_dim = 1;
  std::size_t hidden1 = 1;
  std::size_t hidden2 = 1;
  std::size_t output_dim = 1;
  double dropout_rate = 0.0;
  bool use_input_batchnorm = true;

  void validate() const {
    require(input_dim >= 1 && hidden1 >= 1 && hidden2 >= 1 && output_dim >= 1, ErrorKind::kConfig,
            "network dimensions must be >= 1");
    require(dropout_rate >= 0.0 && dropout_rate < 1.0, ErrorKind::kConfig,
            "dropout_rate must lie in [0, 1)");
  }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

enum class Mode { kTrain, kInference };

/// Activations recorded by a forward pass; consumed by `Network::backward`.
struct ForwardCache {
  const void* owner = nullptr;
  std::uint64_t version = 0;
  Mode mode = Mode::kInference;

  Matrix input;
  Matrix normalized;  // (x - mean) / sqrt(var + eps), batchnorm only
  Matrix batch_mean;  // 1 x input_dim
  Matrix batch_var;   // 1 x input_dim, biased
  Matrix dense_input;
  Matrix pre1, keep1, h1;
  Matrix pre2, keep2, h2;
  Matrix output;
};

struct DenseGrads {
  Matrix weight;
  Matrix bias;
  Matrix input;
};

/// Reverse pass of `affine(input, weight, bias)`.
inline DenseGrads dense_backward(const Matrix& input, const Matrix& weight, const Matrix& output_grad) {
  require(output_grad.rows() == input.rows() && output_grad.cols() == weight.rows(), ErrorKind::kShape,
          "dense_backward: output grad " + shape_string(output_grad));
  return {transpose_times(output_grad, input), column_sums(output_grad), times(output_grad, weight)};
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Parameter gradients in `Network::parameters()` order, plus the gradient
/// with respect to the network input.
struct Backprop {
  std::vector<Matrix> params;
  Matrix input;
};

/// Input batchnorm -> dense -> ReLU -> dropout -> dense -> ReLU -> dropout
/// -> dense -> sigmoid.
///
/// Parameters are stored as [gamma, beta,] W1, b1, W2, b2, W3, b3 with
/// weights shaped (out x in) and biases (1 x out). Every mutable access to
/// the parameters bumps a version counter so caches from an earlier state are
/// rejected by `backward`.
class Network {
 public:
  Network() = default;

  Network(NetworkSpec spec, std::uint64_t init_seed) : spec_(spec) {
    spec_.validate();
    Rng rng(init_seed);
    if (spec_.use_input_batchnorm) {
      params_.emplace_back(1, spec_.input_dim, 1.0);
      params_.emplace_back(1, spec_.input_dim, 0.0);
    }
    const std::size_t dims[4] = {spec_.input_dim, spec_.hidden1, spec_.hidden2, spec_.output_dim};
    for (int layer = 0; layer < 3; ++layer) {
      const std::size_t fan_in = dims[layer];
      const std::size_t fan_out = dims[layer + 1];
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      Matrix w(fan_out, fan_in);
      for (double& v : w.flat()) v = (2.0 * rng.uniform() - 1.0) * limit;
      params_.push_back(std::move(w));
      params_.emplace_back(1, fan_out, 0.0);
    }
    running_mean_ = Matrix(1, spec_.input_dim, 0.0);
    running_var_ = Matrix(1, spec_.input_dim, 1.0);
  }

  const NetworkSpec& spec() const noexcept { return spec_; }
  const std::vector<Matrix>& parameters() const noexcept { return params_; }
  std::vector<Matrix>& mutable_parameters() {
    ++version_;
    return params_;
  }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
  }

  const Matrix& running_mean() const noexcept { return running_mean_; }
  const Matrix& running_var() const noexcept { return running_var_; }
  void set_running_stats(Matrix mean, Matrix var) {
    require(mean.rows() == 1 && mean.cols() == spec_.input_dim && var.same_shape(mean), ErrorKind::kShape,
            "running stats shape");
    for (double v : var.flat()) require(v > 0.0, ErrorKind::kNumeric, "running variance must be > 0");
    running_mean_ = std::move(mean);
    running_var_ = std::move(var);
  }

  std::uint64_t version() const noexcept { return version_; }

  const Matrix& weight(int layer) const { return params_[dense_offset() + 2 * layer]; }
  const Matrix& bias(int layer) const { return params_[dense_offset() + 2 * layer + 1]; }

  /// Runs the network on `batch`. In training mode batchnorm uses batch
  /// statistics and `dropout_seed` draws the dropout masks; in inference mode
  /// running statistics are used and dropout is the identity.
  Matrix forward(const Matrix& batch, Mode mode, std::uint64_t dropout_seed = 0,
                 ForwardCache* cache = nullptr) const {
    require(batch.cols() == spec_.input_dim, ErrorKind::kShape,
            "network expects " + std::to_string(spec_.input_dim) + " input columns, got " +
                shape_string(batch));
    require(batch.all_finite(), ErrorKind::kNumeric, "non-finite network input");

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.owner = this;
    c.version = version_;
    c.mode = mode;
    c.input = batch;

    if (spec_.use_input_batchnorm) {
      const Matrix& gamma = params_[0];
      const Matrix& beta = params_[1];
      const std::size_t n = batch.rows();
      const std::size_t d = batch.cols();
      Matrix mean(1, d), var(1, d);
      if (mode == Mode::kTrain) {
        require(n >= 1, ErrorKind::kShape, "empty batch");
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j) mean[j] += batch(i, j);
        for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j) {
            const double dev = batch(i, j) - mean[j];
            var[j] += dev * dev;
          }
        for (std::size_t j = 0; j < d; ++j) var[j] /= static_cast<double>(n);
      } else {
        mean = running_mean_;
        var = running_var_;
      }
      c.normalized = Matrix(n, d);
      c.dense_input = Matrix(n, d);
      for (std::size_t j = 0; j < d; ++j) {
        const double inv_std = 1.0 / std::sqrt(var[j] + kBatchNormEpsilon);
        for (std::size_t i = 0; i < n; ++i) {
          const double xh = (batch(i, j) - mean[j]) * inv_std;
          c.normalized(i, j) = xh;
          c.dense_input(i, j) = gamma[j] * xh + beta[j];
        }
      }
      c.batch_mean = std::move(mean);
      c.batch_var = std::move(var);
    } else {
      c.dense_input = batch;
    }

    Rng rng(dropout_seed);
    const bool drop = mode == Mode::kTrain && spec_.dropout_rate > 0.0;
    auto hidden = [&](const Matrix& in, int layer, Matrix& pre, Matrix& keep, Matrix& out) {
      pre = affine(in, weight(layer), bias(layer));
      keep = Matrix(pre.rows(), pre.cols(), 1.0);
      if (drop) {
        const double scale = 1.0 / (1.0 - spec_.dropout_rate);
        for (double& k : keep.flat()) k = rng.bernoulli(spec_.dropout_rate) ? 0.0 : scale;
      }
      out = Matrix(pre.rows(), pre.cols());
      for (std::size_t i = 0; i < pre.size(); ++i) out[i] = pre[i] > 0.0 ? pre[i] * keep[i] : 0.0;
    };
    hidden(c.dense_input, 0, c.pre1, c.keep1, c.h1);
    hidden(c.h1, 1, c.pre2, c.keep2, c.h2);
    c.output = affine(c.h2, weight(2), bias(2));
    for (double& v : c.output.flat()) v = sigmoid(v);
    return c.output;
  }

  /// Gradients of a scalar loss given dLoss/dOutput. The cache must come from
  /// a training-mode forward of this exact network state.
  Backprop backward(const ForwardCache& cache, const Matrix& output_grad) const {
    require(cache.owner == this && cache.version == version_, ErrorKind::kState,
            "forward cache is stale or belongs to another network");
    require(cache.mode == Mode::kTrain, ErrorKind::kState, "backward needs a training-mode forward cache");
    require(output_grad.same_shape(cache.output), ErrorKind::kShape,
            "output grad " + shape_string(output_grad) + " vs output " + shape_string(cache.output));

    Backprop out;
    out.params.resize(params_.size());

    Matrix dz = output_grad;
    for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= cache.output[i] * (1.0 - cache.output[i]);

    auto through_hidden = [](Matrix& grad, const Matrix& pre, const Matrix& keep) {
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = pre[i] > 0.0 ? grad[i] * keep[i] : 0.0;
    };

    const std::size_t off = dense_offset();
    DenseGrads g3 = dense_backward(cache.h2, weight(2), dz);
    through_hidden(g3.input, cache.pre2, cache.keep2);
    DenseGrads g2 = dense_backward(cache.h1, weight(1), g3.input);
    through_hidden(g2.input, cache.pre1, cache.keep1);
    DenseGrads g1 = dense_backward(cache.dense_input, weight(0), g2.input);
    out.params[off + 4] = std::move(g3.weight);
    out.params[off + 5] = std::move(g3.bias);
    out.params[off + 2] = std::move(g2.weight);
    out.params[off + 3] = std::move(g2.bias);
    out.params[off + 0] = std::move(g1.weight);
    out.params[off + 1] = std::move(g1.bias);

    if (!spec_.use_input_batchnorm) {
      out.input = std::move(g1.input);
      return out;
    }

    const Matrix& gamma = params_[0];
    const Matrix& dy = g1.input;
    const std::size_t n = dy.rows();
    const std::size_t d = dy.cols();
    Matrix dgamma(1, d), dbeta(1, d), dx(n, d);
    for (std::size_t j = 0; j < d; ++j) {
      double sum_dxh = 0.0;
      double sum_dxh_xh = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double xh = cache.normalized(i, j);
        dgamma[j] += dy(i, j) * xh;
        dbeta[j] += dy(i, j);
        const double dxh = dy(i, j) * gamma[j];
        sum_dxh += dxh;
        sum_dxh_xh += dxh * xh;
      }
      const double inv_std = 1.0 / std::sqrt(cache.batch_var[j] + kBatchNormEpsilon);
      const double nn = static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double dxh = dy(i, j) * gamma[j];
        dx(i, j) = inv_std / nn * (nn * dxh - sum_dxh - cache.normalized(i, j) * sum_dxh_xh);
      }
    }
    out.params[0] = std::move(dgamma);
    out.params[1] = std::move(dbeta);
    out.input = std::move(dx);
    return out;
  }

  /// Folds the batch statistics of a training-mode forward into the running
  /// estimates. The running variance uses the unbiased batch variance.
  void update_running_stats(const ForwardCache& cache) {
    if (!spec_.use_input_batchnorm || cache.mode != Mode::kTrain) return;
    require(cache.owner == this, ErrorKind::kState, "cache belongs to another network");
    const double n = static_cast<double>(cache.input.rows());
    const double unbias = n > 1.0 ? n / (n - 1.0) : 1.0;
    for (std::size_t j = 0; j < spec_.input_dim; ++j) {
      running_mean_[j] = kBatchNormMomentum * running_mean_[j] + (1.0 - kBatchNormMomentum) * cache.batch_mean[j];
      running_var_[j] =
          kBatchNormMomentum * running_var_[j] + (1.0 - kBatchNormMomentum) * cache.batch_var[j] * unbias;
      if (!(running_var_[j] > 0.0)) running_var_[j] = kBatchNormEpsilon;
    }
  }

  /// Copy of this network with an extra input column at `position` whose
  /// first-layer weights are zero, so outputs do not depend on it.
  Network with_inserted_input(std::size_t position) const {
    require(position <= spec_.input_dim, ErrorKind::kShape, "insert position out of range");
    Network out;
    out.spec_ = spec_;
    out.spec_.input_dim += 1;
    auto widen_row_vector = [&](const Matrix& v, double fill) {
      Matrix w(1, v.cols() + 1);
      for (std::size_t j = 0, k = 0; j < w.cols(); ++j) w[j] = j == position ? fill : v[k++];
      return w;
    };
    std::size_t idx = 0;
    if (spec_.use_input_batchnorm) {
      out.params_.push_back(widen_row_vector(params_[0], 1.0));
      out.params_.push_back(widen_row_vector(params_[1], 0.0));
      idx = 2;
    }
    const Matrix& w1 = params_[idx];
    Matrix wide(w1.rows(), w1.cols() + 1);
    for (std::size_t r = 0; r < w1.rows(); ++r)
      for (std::size_t j = 0, k = 0; j < wide.cols(); ++j) wide(r, j) = j == position ? 0.0 : w1(r, k++);
    out.params_.push_back(std::move(wide));
    for (std::size_t i = idx + 1; i < params_.size(); ++i) out.params_.push_back(params_[i]);
    out.running_mean_ = widen_row_vector(running_mean_, 0.0);
    out.running_var_ = widen_row_vector(running_var_, 1.0);
    return out;
  }

  friend bool operator==(const Network& a, const Network& b) {
    return a.spec_ == b.spec_ && a.params_ == b.params_ && a.running_mean_ == b.running_mean_ &&
           a.running_var_ == b.running_var_;
  }

  /// Index of W1 in the parameter list.
  std::size_t dense_offset() const noexcept { return spec_.use_input_batchnorm ? 2 : 0; }

 private:
  NetworkSpec spec_;
  std::vector<Matrix> params_;
  Matrix running_mean_;
  Matrix running_var_;
  std::uint64_t version_ = 0;
};

}  // namespace cgain
