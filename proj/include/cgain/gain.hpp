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
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cgain/data.hpp"
#include "cgain/error.hpp"
#include "cgain/matrix.hpp"
#include "cgain/nn.hpp"
#include "cgain/optimizer.hpp"
#include "cgain/rng.hpp"

namespace cgain {

/// Probabilities are clamped into [kProbabilityFloor, 1 - kProbabilityFloor]
/// before any logarithm.
inline constexpr double kProbabilityFloor = 1e-7;

/// Seed stream identifiers shared by the GAIN and Classifier-GAIN trainers.
/// Identical tags give identical draws in both, which the reduction tests
/// rely on.
namespace stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kShuffle = 2;
inline constexpr std::uint64_t kHintGenerator = 3;
inline constexpr std::uint64_t kNoise = 4;
inline constexpr std::uint64_t kDropoutGenerator = 5;
inline constexpr std::uint64_t kDropoutClassifier = 6;
inline constexpr std::uint64_t kDropoutDiscriminator = 7;
inline constexpr std::uint64_t kHintDiscriminator = 8;
inline constexpr std::uint64_t kDropoutDiscriminatorStep = 9;
inline constexpr std::uint64_t kInferenceNoise = 10;
}  // namespace stream

inline constexpr std::uint64_t kGeneratorRole = 1;
inline constexpr std::uint64_t kDiscriminatorRole = 2;
inline constexpr std::uint64_t kClassifierRole = 3;

struct NetShape {
  std::size_t hidden1 = 64;
  std::size_t hidden2 = 32;
  double dropout = 0.1;

  NetworkSpec spec(std::size_t input_dim, std::size_t output_dim, bool batchnorm = true) const {
    return {input_dim, hidden1, hidden2, output_dim, dropout, batchnorm};
  }
};

struct GainHyper {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double lr_g = 1e-3;
  double lr_d = 1e-3;
  double weight_decay_g = 5e-4;
  double weight_decay_d = 5e-4;
  double p_hint = 0.9;
  double alpha = 5.0;
  NetShape generator{64, 32, 0.1};
  NetShape discriminator{64, 32, 0.1};

  void validate() const {
    require(batch_size >= 1, ErrorKind::kConfig, "batch_size must be >= 1");
    require(lr_g > 0.0 && lr_d > 0.0, ErrorKind::kConfig, "learning rates must be positive");
    require(weight_decay_g >= 0.0 && weight_decay_d >= 0.0, ErrorKind::kConfig, "weight decay must be >= 0");
    require(p_hint >= 0.0 && p_hint <= 1.0, ErrorKind::kConfig, "p_hint must lie in [0,1]");
    require(alpha >= 0.0, ErrorKind::kConfig, "alpha must be >= 0");
  }
};

// ---------------------------------------------------------------------------
// Noise, hint and mixing

/// h = m * b + 0.5 * (1 - b).
inline Matrix hint_from(const Matrix& mask, const Matrix& b) {
  require_same_shape(mask, b, "hint");
  Matrix h(mask.rows(), mask.cols());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = mask[i] * b[i] + 0.5 * (1.0 - b[i]);
  return h;
}

/// Entries uniform on (0, 1].
inline Matrix sample_noise(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix z(rows, cols);
  for (double& v : z.flat()) v = rng.uniform_open_closed();
  return z;
}

/// Entries Bernoulli(p).
inline Matrix sample_hint_draw(std::size_t rows, std::size_t cols, double p, std::uint64_t seed) {
  Rng rng(seed);
  Matrix b(rows, cols);
  for (double& v : b.flat()) v = rng.bernoulli(p) ? 1.0 : 0.0;
  return b;
}

struct NoiseAndHint {
  Matrix z;
  Matrix b;
  Matrix h;
};

inline NoiseAndHint sample_noise_and_hint(const Matrix& mask, double p_hint, std::uint64_t seed) {
  require(p_hint >= 0.0 && p_hint <= 1.0, ErrorKind::kConfig, "p_hint must lie in [0,1]");
  NoiseAndHint out;
  out.z = sample_noise(mask.rows(), mask.cols(), derive_seed(seed, {stream::kNoise}));
  out.b = sample_hint_draw(mask.rows(), mask.cols(), p_hint, derive_seed(seed, {stream::kHintGenerator}));
  out.h = hint_from(mask, out.b);
  return out;
}

struct GainBatch {
  Matrix x_tilde;
  Matrix mask;
  Matrix z;
  Matrix b;
  Matrix h;
};

struct ImputationResult {
  Matrix g;      // generator reconstruction of every cell
  Matrix x_hat;  // observed cells from x_tilde, missing cells from g
};

/// Generator input: the noise-filled data followed by the mask (width 2d).
inline Matrix generator_input(const Matrix& x_tilde, const Matrix& mask, const Matrix& z) {
  const Matrix x_ddot = mix_by_mask(mask, x_tilde, z);
  return hconcat({&x_ddot, &mask});
}

inline ImputationResult impute_batch(const Network& generator, const GainBatch& batch, Mode mode = Mode::kInference,
                                     std::uint64_t dropout_seed = 0, ForwardCache* cache = nullptr) {
  require_same_shape(batch.x_tilde, batch.mask, "impute_batch");
  require(generator.spec().input_dim == 2 * batch.mask.cols() && generator.spec().output_dim == batch.mask.cols(),
          ErrorKind::kShape, "generator width does not match data width");
  ImputationResult r;
  r.g = generator.forward(generator_input(batch.x_tilde, batch.mask, batch.z), mode, dropout_seed, cache);
  r.x_hat = mix_by_mask(batch.mask, batch.x_tilde, r.g);
  return r;
}

// ---------------------------------------------------------------------------
// Losses. Each is the batch mean of per-sample sums over features; `grad` is
// the derivative of `value` with respect to the probability/prediction input.

struct LossValue {
  double value = 0.0;
  Matrix grad;
};

inline double clamp_probability(double p) { return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor); }

/// d/dp of -log(clamp(p)); zero where the clamp is active.
inline double neg_log_grad(double p) {
  return (p < kProbabilityFloor || p > 1.0 - kProbabilityFloor) ? 0.0 : -1.0 / p;
}

/// -sum_j (1 - m_j) log(m_hat_j): pushes missing cells to look observed.
inline LossValue generator_adversarial_loss(const Matrix& mask, const Matrix& m_hat) {
  require_same_shape(mask, m_hat, "generator_adversarial_loss");
  const double inv_n = 1.0 / static_cast<double>(mask.rows());
  LossValue out{0.0, Matrix(mask.rows(), mask.cols())};
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double w = 1.0 - mask[i];
    if (w == 0.0) continue;
    out.value -= w * std::log(clamp_probability(m_hat[i]));
    out.grad[i] = w * neg_log_grad(m_hat[i]) * inv_n;
  }
  out.value *= inv_n;
  return out;
}

/// sum_j m_j * l(x_j, g_j) with l = (x - g)^2 for numeric features and
/// -x log(g) for binary ones, evaluated on the generator reconstruction.
inline LossValue reconstruction_loss(const Matrix& x_observed, const Matrix& reconstruction, const Matrix& mask,
                                     std::span<const FeatureKind> kinds) {
  require_same_shape(x_observed, reconstruction, "reconstruction_loss");
  require_same_shape(x_observed, mask, "reconstruction_loss");
  require(kinds.size() == mask.cols(), ErrorKind::kShape, "reconstruction_loss: kinds width");
  const double inv_n = 1.0 / static_cast<double>(mask.rows());
  LossValue out{0.0, Matrix(mask.rows(), mask.cols())};
  for (std::size_t i = 0; i < mask.rows(); ++i) {
    for (std::size_t j = 0; j < mask.cols(); ++j) {
      const double m = mask(i, j);
      if (m == 0.0) continue;
      const double x = x_observed(i, j);
      const double g = reconstruction(i, j);
      if (kinds[j] == FeatureKind::kNumeric) {
        const double diff = x - g;
        out.value += m * diff * diff;
        out.grad(i, j) = -2.0 * m * diff * inv_n;
      } else {
        out.value -= m * x * std::log(clamp_probability(g));
        out.grad(i, j) = m * x * neg_log_grad(g) * inv_n;
      }
    }
  }
  out.value *= inv_n;
  return out;
}

/// -sum_j [m_j log(m_hat_j) + (1 - m_j) log(1 - m_hat_j)].
inline LossValue discriminator_loss(const Matrix& mask, const Matrix& m_hat) {
  require_same_shape(mask, m_hat, "discriminator_loss");
  const double inv_n = 1.0 / static_cast<double>(mask.rows());
  LossValue out{0.0, Matrix(mask.rows(), mask.cols())};
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double m = mask[i];
    const double p = m_hat[i];
    out.value -= m * std::log(clamp_probability(p)) + (1.0 - m) * std::log(clamp_probability(1.0 - p));
    // d/dp of -log(1 - p) is -d/dq of -log(q) at q = 1 - p.
    out.grad[i] = (m * neg_log_grad(p) - (1.0 - m) * neg_log_grad(1.0 - p)) * inv_n;
  }
  out.value *= inv_n;
  return out;
}

/// Binary cross entropy of an (n x 1) probability column against labels.
inline LossValue classification_loss(std::span<const int> labels, const Matrix& y_hat) {
  require(y_hat.cols() == 1 && y_hat.rows() == labels.size(), ErrorKind::kShape, "classification_loss shape");
  const double inv_n = 1.0 / static_cast<double>(labels.size());
  LossValue out{0.0, Matrix(y_hat.rows(), 1)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double y = labels[i];
    const double p = y_hat[i];
    out.value -= y * std::log(clamp_probability(p)) + (1.0 - y) * std::log(clamp_probability(1.0 - p));
    out.grad[i] = (y * neg_log_grad(p) - (1.0 - y) * neg_log_grad(1.0 - p)) * inv_n;
  }
  out.value *= inv_n;
  return out;
}

// ---------------------------------------------------------------------------
// Training schedule shared by the adversarial trainers

/// Row indices of each minibatch of `epoch`; the last batch may be short.
inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n_rows, std::size_t batch_size,
                                                           std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) order[i] = i;
  Rng rng(derive_seed(seed, {stream::kShuffle, epoch}));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n_rows; start += batch_size) {
    const std::size_t end = std::min(n_rows, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

inline std::vector<double> observed_counts(const MaskedDataset& data) {
  std::vector<double> observed(data.cols(), 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t j = 0; j < data.cols(); ++j) observed[j] += data.mask(i, j);
  return observed;
}

inline void require_observed_columns(const MaskedDataset& data) {
  const auto observed = observed_counts(data);
  for (std::size_t j = 0; j < data.cols(); ++j)
    require(observed[j] > 0.0, ErrorKind::kData, "feature '" + data.names[j] + "' has no observed values");
}

inline void require_finite_loss(double v, const char* what, std::size_t epoch, std::size_t batch) {
  require(std::isfinite(v), ErrorKind::kNumeric,
          std::string("non-finite ") + what + " at epoch " + std::to_string(epoch) + ", batch " +
              std::to_string(batch));
}

enum class TrainPhase { kGenerator, kDiscriminator };

/// Passed to training observers after every parameter update.
struct TrainEvent {
  TrainPhase phase;
  std::size_t epoch;
  std::size_t batch;
  std::size_t step;  // global iteration counter
  const Network* generator;
  const Network* classifier;  // null for plain GAIN
  const Network* discriminator;
};

using TrainObserver = std::function<void(const TrainEvent&)>;

// ---------------------------------------------------------------------------
// Plain GAIN

struct GainEpochRecord {
  std::size_t epoch = 0;
  double loss_g_adv = 0.0;
  double loss_r = 0.0;
  double loss_d = 0.0;
};

struct GainModel {
  Network generator;
  Network discriminator;
  std::vector<GainEpochRecord> history;
};

/// Generator (2d -> d) and discriminator (x_hat, h: 2d -> d) at initialization.
inline GainModel init_gain(std::size_t d, const GainHyper& hyper, std::uint64_t seed) {
  GainModel m;
  m.generator = Network(hyper.generator.spec(2 * d, d), derive_seed(seed, {stream::kInit, kGeneratorRole}));
  m.discriminator =
      Network(hyper.discriminator.spec(2 * d, d), derive_seed(seed, {stream::kInit, kDiscriminatorRole}));
  return m;
}

/// Alternating minibatch training: one generator update on L_G + alpha L_R,
/// then one discriminator update on L_D reusing that step's imputation.
/// `train` must already be scaled.
inline void train_gain(GainModel& model, const MaskedDataset& train, const GainHyper& hyper, std::uint64_t seed,
                       const TrainObserver& observer = {}) {
  hyper.validate();
  train.validate();
  require_observed_columns(train);
  const std::size_t d = train.cols();
  require(model.generator.spec().input_dim == 2 * d && model.discriminator.spec().input_dim == 2 * d,
          ErrorKind::kShape, "GAIN networks do not match data width");

  Adam adam_g({hyper.lr_g, 0.9, 0.999, 1e-8, hyper.weight_decay_g});
  Adam adam_d({hyper.lr_d, 0.9, 0.999, 1e-8, hyper.weight_decay_d});
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    GainEpochRecord rec;
    rec.epoch = epoch + 1;
    const auto batches = epoch_batches(train.rows(), hyper.batch_size, seed, epoch);
    for (std::size_t bi = 0; bi < batches.size(); ++bi, ++step) {
      const auto& rows = batches[bi];
      GainBatch batch;
      batch.x_tilde = select_rows(train.values, rows);
      batch.mask = select_rows(train.mask, rows);
      const std::size_t n = rows.size();
      batch.b = sample_hint_draw(n, d, hyper.p_hint, derive_seed(seed, {stream::kHintGenerator, step}));
      batch.h = hint_from(batch.mask, batch.b);
      batch.z = sample_noise(n, d, derive_seed(seed, {stream::kNoise, step, 0}));

      ForwardCache g_cache, d_cache;
      const ImputationResult imp = impute_batch(model.generator, batch, Mode::kTrain,
                                                derive_seed(seed, {stream::kDropoutGenerator, step, 0}), &g_cache);
      const Matrix d_in = hconcat({&imp.x_hat, &batch.h});
      const Matrix m_hat = model.discriminator.forward(
          d_in, Mode::kTrain, derive_seed(seed, {stream::kDropoutDiscriminator, step, 0}), &d_cache);
      const LossValue adv = generator_adversarial_loss(batch.mask, m_hat);
      const LossValue rec_loss = reconstruction_loss(batch.x_tilde, imp.g, batch.mask, train.kinds);
      require_finite_loss(adv.value + hyper.alpha * rec_loss.value, "generator loss", epoch + 1, bi + 1);

      const Backprop d_back = model.discriminator.backward(d_cache, adv.grad);
      Matrix dg(n, d);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
          dg(i, j) = (1.0 - batch.mask(i, j)) * d_back.input(i, j) + hyper.alpha * rec_loss.grad(i, j);
      const Backprop g_back = model.generator.backward(g_cache, dg);
      adam_g.step(model.generator.mutable_parameters(), g_back.params);
      model.generator.update_running_stats(g_cache);
      if (observer) observer({TrainPhase::kGenerator, epoch + 1, bi + 1, step, &model.generator, nullptr,
                              &model.discriminator});

      const Matrix b_d = sample_hint_draw(n, d, hyper.p_hint, derive_seed(seed, {stream::kHintDiscriminator, step}));
      const Matrix h_d = hint_from(batch.mask, b_d);
      const Matrix d_in2 = hconcat({&imp.x_hat, &h_d});
      ForwardCache d_cache2;
      const Matrix m_hat2 = model.discriminator.forward(
          d_in2, Mode::kTrain, derive_seed(seed, {stream::kDropoutDiscriminatorStep, step}), &d_cache2);
      const LossValue dl = discriminator_loss(batch.mask, m_hat2);
      require_finite_loss(dl.value, "discriminator loss", epoch + 1, bi + 1);
      const Backprop d_back2 = model.discriminator.backward(d_cache2, dl.grad);
      adam_d.step(model.discriminator.mutable_parameters(), d_back2.params);
      model.discriminator.update_running_stats(d_cache2);
      if (observer) observer({TrainPhase::kDiscriminator, epoch + 1, bi + 1, step, &model.generator, nullptr,
                              &model.discriminator});

      rec.loss_g_adv += adv.value;
      rec.loss_r += rec_loss.value;
      rec.loss_d += dl.value;
    }
    const double nb = static_cast<double>(batches.size());
    rec.loss_g_adv /= nb;
    rec.loss_r /= nb;
    rec.loss_d /= nb;
    model.history.push_back(rec);
  }
}

inline GainModel train_gain(const MaskedDataset& train, const GainHyper& hyper, std::uint64_t seed,
                            const TrainObserver& observer = {}) {
  GainModel model = init_gain(train.cols(), hyper, seed);
  train_gain(model, train, hyper, seed, observer);
  return model;
}

// ---------------------------------------------------------------------------
// Inference

/// Generator reconstruction for draw number `draw`; row i's noise comes from
/// its own (seed, i, draw) stream so results do not depend on batching.
inline Matrix generator_draw(const Network& generator, const MaskedDataset& data, std::uint64_t seed,
                             std::size_t draw) {
  const std::size_t d = data.cols();
  require(generator.spec().input_dim == 2 * d && generator.spec().output_dim == d, ErrorKind::kState,
          "generator was trained on " + std::to_string(generator.spec().output_dim) + " features, data has " +
              std::to_string(d));
  Matrix z(data.rows(), d);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    Rng rng(derive_seed(seed, {stream::kInferenceNoise, i, draw}));
    for (double& v : z.row(i)) v = rng.uniform_open_closed();
  }
  return generator.forward(generator_input(data.values, data.mask, z), Mode::kInference);
}

/// Completes `data` with the generator in inference mode, averaging the
/// reconstruction over `n_draws` noise draws. Observed cells are copied.
inline Matrix impute_full(const Network& generator, const MaskedDataset& data, std::uint64_t seed,
                          std::size_t n_draws = 1) {
  require(n_draws >= 1, ErrorKind::kConfig, "n_draws must be >= 1");
  Matrix g = generator_draw(generator, data, seed, 0);
  if (n_draws > 1) {
    for (std::size_t r = 1; r < n_draws; ++r) {
      const Matrix next = generator_draw(generator, data, seed, r);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += next[k];
    }
    for (double& v : g.flat()) v /= static_cast<double>(n_draws);
  }
  return mix_by_mask(data.mask, data.values, g);
}

}  // namespace cgain
