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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgain/data.hpp"
#include "cgain/error.hpp"
#include "cgain/gain.hpp"
#include "cgain/matrix.hpp"
#include "cgain/metrics.hpp"
#include "cgain/nn.hpp"
#include "cgain/optimizer.hpp"

namespace cgain {

struct CgHyper {
  /// Shared adversarial knobs: epochs, batch size, G/D learning rates and
  /// weight decays, p_hint, alpha, G/D shapes.
  GainHyper gain;
  double lr_c = 1e-3;
  double weight_decay_c = 5e-4;
  double beta = 1.0;
  std::size_t k_steps = 1;
  NetShape classifier{32, 16, 0.1};
  /// When set, the discriminator sees this constant in place of the
  /// classifier output and its weights for that input stay at zero. With
  /// beta = 0 this reduces training to plain GAIN plus a detached classifier.
  std::optional<double> pinned_yhat;

  void validate() const {
    gain.validate();
    require(lr_c > 0.0, ErrorKind::kConfig, "lr_c must be positive");
    require(weight_decay_c >= 0.0, ErrorKind::kConfig, "weight_decay_c must be >= 0");
    require(beta >= 0.0, ErrorKind::kConfig, "beta must be >= 0");
    require(k_steps >= 1, ErrorKind::kConfig, "k_steps must be >= 1");
  }
};

struct CgEpochRecord {
  std::size_t epoch = 0;
  double loss_g_adv = 0.0;
  double loss_r = 0.0;
  double loss_c = 0.0;
  double loss_d = 0.0;
  double train_macro_f1 = 0.0;
};

struct TrainedTriple {
  Network generator;      // [x_ddot, m] (2d) -> g (d)
  Network classifier;     // x_hat (d) -> y_hat (1)
  Network discriminator;  // [x_hat, y_hat, h] (2d + 1) -> m_hat (d)
  ScalerState scaler;
  std::vector<CgEpochRecord> history;
  std::string config_hash;

  std::size_t features() const noexcept { return classifier.spec().input_dim; }
};

inline TrainedTriple init_classifier_gain(std::size_t d, const CgHyper& hyper, std::uint64_t seed) {
  TrainedTriple t;
  t.generator = Network(hyper.gain.generator.spec(2 * d, d), derive_seed(seed, {stream::kInit, kGeneratorRole}));
  t.classifier = Network(hyper.classifier.spec(d, 1), derive_seed(seed, {stream::kInit, kClassifierRole}));
  t.discriminator =
      Network(hyper.gain.discriminator.spec(2 * d + 1, d), derive_seed(seed, {stream::kInit, kDiscriminatorRole}));
  if (hyper.pinned_yhat) {
    Matrix& w1 = t.discriminator.mutable_parameters()[t.discriminator.dense_offset()];
    for (std::size_t r = 0; r < w1.rows(); ++r) w1(r, d) = 0.0;
  }
  return t;
}

/// Outcome probabilities of the classifier in inference mode.
inline std::vector<double> classify(const Network& classifier, const Matrix& x_hat) {
  require(classifier.spec().input_dim == x_hat.cols() && classifier.spec().output_dim == 1, ErrorKind::kShape,
          "classifier expects " + std::to_string(classifier.spec().input_dim) + " columns, got " +
              shape_string(x_hat));
  const Matrix out = classifier.forward(x_hat, Mode::kInference);
  return {out.flat().begin(), out.flat().end()};
}

/// Discriminator input layout: d columns of x_hat, one column of y_hat, d
/// columns of h.
inline Matrix discriminator_input(const Matrix& x_hat, const Matrix& y_hat, const Matrix& h) {
  require(y_hat.cols() == 1 && y_hat.rows() == x_hat.rows(), ErrorKind::kShape, "y_hat must be an (n x 1) column");
  require_same_shape(x_hat, h, "discriminator input");
  return hconcat({&x_hat, &y_hat, &h});
}

inline Matrix discriminate(const Network& discriminator, const Matrix& x_hat, const Matrix& y_hat, const Matrix& h,
                           Mode mode = Mode::kInference, std::uint64_t dropout_seed = 0,
                           ForwardCache* cache = nullptr) {
  require(discriminator.spec().input_dim == 2 * x_hat.cols() + 1, ErrorKind::kShape,
          "discriminator width does not match (x_hat, y_hat, h)");
  return discriminator.forward(discriminator_input(x_hat, y_hat, h), mode, dropout_seed, cache);
}

struct CgLoss {
  double total = 0.0;
  double adversarial = 0.0;
  double reconstruction = 0.0;
  double classification = 0.0;
};

/// total = L_G + alpha * L_R + beta * L_C. L_R is evaluated on the generator
/// reconstruction `g` at observed cells.
inline CgLoss combined_cg_loss(const Matrix& mask, const Matrix& m_hat, const Matrix& x_observed, const Matrix& g,
                               std::span<const FeatureKind> kinds, std::span<const int> labels, const Matrix& y_hat,
                               double alpha, double beta) {
  CgLoss l;
  l.adversarial = generator_adversarial_loss(mask, m_hat).value;
  l.reconstruction = reconstruction_loss(x_observed, g, mask, kinds).value;
  l.classification = classification_loss(labels, y_hat).value;
  l.total = l.adversarial + alpha * l.reconstruction + beta * l.classification;
  return l;
}

struct CgBatch {
  GainBatch gain;
  std::vector<int> labels;
  std::vector<FeatureKind> kinds;
};

struct CgDropoutSeeds {
  std::uint64_t generator = 0;
  std::uint64_t classifier = 0;
  std::uint64_t discriminator = 0;
};

/// One pass of the generator+classifier objective, all networks in training
/// mode. The discriminator is only read; with gradients requested its input
/// gradient carries L_G back into y_hat (hence C) and x_hat (hence G).
struct CgObjective {
  CgLoss loss;
  Matrix g;
  Matrix x_hat;
  Matrix y_hat;    // classifier output
  Matrix y_for_d;  // what the discriminator saw in the y_hat slot
  Matrix m_hat;
  std::vector<Matrix> generator_grads;
  std::vector<Matrix> classifier_grads;
  ForwardCache generator_cache;
  ForwardCache classifier_cache;
};

inline CgObjective evaluate_cg_objective(const Network& generator, const Network& classifier,
                                         const Network& discriminator, const CgBatch& batch, const CgHyper& hyper,
                                         const CgDropoutSeeds& seeds, bool with_gradients) {
  const Matrix& mask = batch.gain.mask;
  const std::size_t n = mask.rows();
  const std::size_t d = mask.cols();
  const double alpha = hyper.gain.alpha;
  const double beta = hyper.beta;

  CgObjective o;
  const ImputationResult imp = impute_batch(generator, batch.gain, Mode::kTrain, seeds.generator, &o.generator_cache);
  o.g = imp.g;
  o.x_hat = imp.x_hat;
  o.y_hat = classifier.forward(o.x_hat, Mode::kTrain, seeds.classifier, &o.classifier_cache);
  o.y_for_d = hyper.pinned_yhat ? Matrix(n, 1, *hyper.pinned_yhat) : o.y_hat;
  ForwardCache d_cache;
  o.m_hat = discriminate(discriminator, o.x_hat, o.y_for_d, batch.gain.h, Mode::kTrain, seeds.discriminator, &d_cache);

  const LossValue adv = generator_adversarial_loss(mask, o.m_hat);
  const LossValue rec = reconstruction_loss(batch.gain.x_tilde, o.g, mask, batch.kinds);
  const LossValue cls = classification_loss(batch.labels, o.y_hat);
  o.loss = {adv.value + alpha * rec.value + beta * cls.value, adv.value, rec.value, cls.value};
  if (!with_gradients) return o;

  const Backprop d_back = discriminator.backward(d_cache, adv.grad);
  Matrix dy(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double through_d = hyper.pinned_yhat ? 0.0 : d_back.input(i, d);
    dy[i] = through_d + beta * cls.grad[i];
  }
  Backprop c_back = classifier.backward(o.classifier_cache, dy);
  Matrix dg(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double dx_hat = d_back.input(i, j) + c_back.input(i, j);
      dg(i, j) = (1.0 - mask(i, j)) * dx_hat + alpha * rec.grad(i, j);
    }
  Backprop g_back = generator.backward(o.generator_cache, dg);
  o.generator_grads = std::move(g_back.params);
  o.classifier_grads = std::move(c_back.params);
  return o;
}

/// Joint minibatch training of generator, classifier and discriminator.
///
/// Each iteration draws one hint batch b, then runs `k_steps` generator +
/// classifier updates (fresh noise each) on L_G + alpha L_R + beta L_C with
/// the discriminator frozen, then one discriminator update on L_D with a fresh
/// hint draw, reusing x_hat and y_hat from the last inner step with G and C
/// frozen. Only the network being trained updates its batchnorm statistics.
/// `train` must already be scaled; `triple` carries the starting networks.
inline void train_classifier_gain(TrainedTriple& triple, const MaskedDataset& train, const CgHyper& hyper,
                                  std::uint64_t seed, const TrainObserver& observer = {}) {
  hyper.validate();
  train.validate();
  require_observed_columns(train);
  const std::size_t d = train.cols();
  require(triple.generator.spec().input_dim == 2 * d && triple.classifier.spec().input_dim == d &&
              triple.discriminator.spec().input_dim == 2 * d + 1,
          ErrorKind::kShape, "Classifier-GAIN networks do not match data width");

  const GainHyper& gh = hyper.gain;
  Adam adam_g({gh.lr_g, 0.9, 0.999, 1e-8, gh.weight_decay_g});
  Adam adam_c({hyper.lr_c, 0.9, 0.999, 1e-8, hyper.weight_decay_c});
  Adam adam_d({gh.lr_d, 0.9, 0.999, 1e-8, gh.weight_decay_d});
  const std::size_t yhat_weight_block = triple.discriminator.dense_offset();

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < gh.epochs; ++epoch) {
    CgEpochRecord rec;
    rec.epoch = epoch + 1;
    std::vector<int> epoch_labels;
    std::vector<double> epoch_scores;
    const auto batches = epoch_batches(train.rows(), gh.batch_size, seed, epoch);
    for (std::size_t bi = 0; bi < batches.size(); ++bi, ++step) {
      const auto& rows = batches[bi];
      const std::size_t n = rows.size();
      CgBatch batch;
      batch.gain.x_tilde = select_rows(train.values, rows);
      batch.gain.mask = select_rows(train.mask, rows);
      for (std::size_t r : rows) batch.labels.push_back(train.labels[r]);
      batch.kinds = train.kinds;
      batch.gain.b = sample_hint_draw(n, d, gh.p_hint, derive_seed(seed, {stream::kHintGenerator, step}));
      batch.gain.h = hint_from(batch.gain.mask, batch.gain.b);

      CgObjective last;
      for (std::size_t inner = 0; inner < hyper.k_steps; ++inner) {
        batch.gain.z = sample_noise(n, d, derive_seed(seed, {stream::kNoise, step, inner}));
        const CgDropoutSeeds seeds{derive_seed(seed, {stream::kDropoutGenerator, step, inner}),
                                   derive_seed(seed, {stream::kDropoutClassifier, step, inner}),
                                   derive_seed(seed, {stream::kDropoutDiscriminator, step, inner})};
        last = evaluate_cg_objective(triple.generator, triple.classifier, triple.discriminator, batch, hyper, seeds,
                                     true);
        require_finite_loss(last.loss.total, "generator/classifier loss", epoch + 1, bi + 1);
        adam_g.step(triple.generator.mutable_parameters(), last.generator_grads);
        adam_c.step(triple.classifier.mutable_parameters(), last.classifier_grads);
        triple.generator.update_running_stats(last.generator_cache);
        triple.classifier.update_running_stats(last.classifier_cache);
        if (observer) {
          observer({TrainPhase::kGenerator, epoch + 1, bi + 1, step, &triple.generator, &triple.classifier,
                    &triple.discriminator});
        }
      }

      const Matrix b_d = sample_hint_draw(n, d, gh.p_hint, derive_seed(seed, {stream::kHintDiscriminator, step}));
      const Matrix h_d = hint_from(batch.gain.mask, b_d);
      ForwardCache d_cache;
      const Matrix m_hat = discriminate(triple.discriminator, last.x_hat, last.y_for_d, h_d, Mode::kTrain,
                                        derive_seed(seed, {stream::kDropoutDiscriminatorStep, step}), &d_cache);
      const LossValue dl = discriminator_loss(batch.gain.mask, m_hat);
      require_finite_loss(dl.value, "discriminator loss", epoch + 1, bi + 1);
      Backprop d_back = triple.discriminator.backward(d_cache, dl.grad);
      if (hyper.pinned_yhat) {
        Matrix& gw = d_back.params[yhat_weight_block];
        for (std::size_t r = 0; r < gw.rows(); ++r) gw(r, d) = 0.0;
      }
      adam_d.step(triple.discriminator.mutable_parameters(), d_back.params);
      triple.discriminator.update_running_stats(d_cache);
      if (observer) {
        observer({TrainPhase::kDiscriminator, epoch + 1, bi + 1, step, &triple.generator, &triple.classifier,
                  &triple.discriminator});
      }

      rec.loss_g_adv += last.loss.adversarial;
      rec.loss_r += last.loss.reconstruction;
      rec.loss_c += last.loss.classification;
      rec.loss_d += dl.value;
      epoch_labels.insert(epoch_labels.end(), batch.labels.begin(), batch.labels.end());
      epoch_scores.insert(epoch_scores.end(), last.y_hat.flat().begin(), last.y_hat.flat().end());
    }
    const double nb = static_cast<double>(batches.size());
    rec.loss_g_adv /= nb;
    rec.loss_r /= nb;
    rec.loss_c /= nb;
    rec.loss_d /= nb;
    rec.train_macro_f1 = epoch_labels.empty() ? 0.0 : macro_f1(epoch_labels, epoch_scores);
    triple.history.push_back(rec);
  }
}

inline TrainedTriple train_classifier_gain(const MaskedDataset& train, const CgHyper& hyper, std::uint64_t seed,
                                           const TrainObserver& observer = {}) {
  TrainedTriple triple = init_classifier_gain(train.cols(), hyper, seed);
  train_classifier_gain(triple, train, hyper, seed, observer);
  return triple;
}

struct Prediction {
  Matrix x_hat;
  std::vector<double> y_hat;
};

/// Imputes with the generator, then classifies. Labels in `data` are never
/// read. `data` must be scaled with `triple.scaler`.
inline Prediction predict(const TrainedTriple& triple, const MaskedDataset& data, std::uint64_t seed,
                          std::size_t n_draws = 1) {
  require(n_draws >= 1, ErrorKind::kConfig, "n_draws must be >= 1");
  if (triple.scaler.cols() != 0) check_scaler(data, triple.scaler);
  require(triple.features() == data.cols(), ErrorKind::kState, "model feature count does not match data");
  Prediction p;
  p.x_hat = Matrix(data.rows(), data.cols());
  p.y_hat.assign(data.rows(), 0.0);
  for (std::size_t r = 0; r < n_draws; ++r) {
    const Matrix x_hat = mix_by_mask(data.mask, data.values, generator_draw(triple.generator, data, seed, r));
    const std::vector<double> y = classify(triple.classifier, x_hat);
    if (n_draws == 1) {
      p.x_hat = x_hat;
      p.y_hat = y;
      return p;
    }
    for (std::size_t k = 0; k < x_hat.size(); ++k) p.x_hat[k] += x_hat[k];
    for (std::size_t i = 0; i < y.size(); ++i) p.y_hat[i] += y[i];
  }
  const double inv = 1.0 / static_cast<double>(n_draws);
  for (double& v : p.x_hat.flat()) v *= inv;
  for (double& v : p.y_hat) v *= inv;
  // Averaging may perturb observed cells in the last bit; restore them.
  p.x_hat = mix_by_mask(data.mask, data.values, p.x_hat);
  return p;
}

}  // namespace cgain
