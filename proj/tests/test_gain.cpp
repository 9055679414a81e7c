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


#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "cgain/gain.hpp"
#include "cgain/impute.hpp"
#include "cgain/metrics.hpp"
#include "test_util.hpp"

namespace cgain {
namespace {

using testing::bitwise_equal;
using testing::random_mask;
using testing::random_matrix;

GainHyper quick_hyper(std::size_t epochs = 3) {
  GainHyper h;
  h.epochs = epochs;
  h.batch_size = 32;
  return h;
}

TEST(Hint, ForcedDrawsGiveMaskOrHalf) {
  const Matrix m = random_mask(20, 5, 0.4, 1);
  EXPECT_TRUE(bitwise_equal(hint_from(m, Matrix(20, 5, 1.0)), m));
  const Matrix half = hint_from(m, Matrix(20, 5, 0.0));
  for (double v : half.flat()) EXPECT_EQ(v, 0.5);
}

TEST(Hint, RevealRateMatchesProbability) {
  const Matrix m = random_mask(1000, 100, 0.3, 2);
  const NoiseAndHint nh = sample_noise_and_hint(m, 0.9, 7);
  std::size_t half = 0;
  for (std::size_t k = 0; k < nh.h.size(); ++k) {
    const double h = nh.h[k];
    EXPECT_TRUE(h == 0.0 || h == 0.5 || h == 1.0);
    if (h != 0.5) EXPECT_EQ(h, m[k]);
    half += h == 0.5;
  }
  EXPECT_NEAR(static_cast<double>(half) / 1e5, 0.10, 0.01);
  for (double z : nh.z.flat()) {
    EXPECT_GT(z, 0.0);
    EXPECT_LE(z, 1.0);
  }
  EXPECT_THROW(sample_noise_and_hint(m, 1.5, 1), Error);
}

TEST(ImputeBatch, FullMaskReturnsDataAndEmptyMaskReturnsGenerator) {
  Network g({8, 6, 5, 4, 0.0, true}, 3);
  GainBatch b;
  b.x_tilde = random_matrix(6, 4, 1, 0.0, 1.0);
  b.z = random_matrix(6, 4, 2, 0.0, 1.0);
  b.mask = Matrix(6, 4, 1.0);
  EXPECT_TRUE(bitwise_equal(impute_batch(g, b).x_hat, b.x_tilde));
  b.mask = Matrix(6, 4, 0.0);
  const ImputationResult r = impute_batch(g, b);
  EXPECT_TRUE(bitwise_equal(r.x_hat, r.g));
}

TEST(ImputeBatch, MixedMaskMixesCellByCell) {
  Network g({6, 3, 3, 3, 0.0, false}, 1);
  auto& p = g.mutable_parameters();
  p[0] = Matrix::from_rows({{0.2, 0, 0, 0.1, 0, 0}, {0, 0.3, 0, 0, 0.1, 0}, {0, 0, 0.4, 0, 0, 0.1}});
  p[1].fill(0.05);
  p[2] = Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  p[4] = Matrix::from_rows({{2, 0, 0}, {0, 2, 0}, {0, 0, 2}});
  GainBatch b;
  b.x_tilde = Matrix::from_rows({{0.9, 0.0, 0.3}});
  b.mask = Matrix::from_rows({{1, 0, 1}});
  b.z = Matrix::from_rows({{0.5, 0.7, 0.1}});
  const ImputationResult r = impute_batch(g, b);
  // Generator input [0.9, 0.7, 0.3, 1, 0, 1]; each hidden unit feeds one output.
  const double in[3][2] = {{0.9, 1.0}, {0.7, 0.0}, {0.3, 1.0}};
  const double w[3] = {0.2, 0.3, 0.4};
  for (int j = 0; j < 3; ++j) {
    const double h = w[j] * in[j][0] + 0.1 * in[j][1] + 0.05;
    const double want = 1.0 / (1.0 + std::exp(-2.0 * h));
    EXPECT_NEAR(r.g(0, j), want, 1e-14);
  }
  EXPECT_EQ(r.x_hat(0, 0), 0.9);
  EXPECT_EQ(r.x_hat(0, 1), r.g(0, 1));
  EXPECT_EQ(r.x_hat(0, 2), 0.3);
}

TEST(Losses, HandValues) {
  EXPECT_EQ(generator_adversarial_loss(Matrix(3, 2, 1.0), random_matrix(3, 2, 1, 0.1, 0.9)).value, 0.0);
  const Matrix x = random_matrix(4, 3, 2, 0.0, 1.0);
  const std::vector<FeatureKind> kinds(3, FeatureKind::kNumeric);
  EXPECT_EQ(reconstruction_loss(x, x, random_mask(4, 3, 0.3, 3), kinds).value, 0.0);
  const LossValue d = discriminator_loss(Matrix::from_rows({{1, 0}}), Matrix::from_rows({{0.5, 0.5}}));
  EXPECT_NEAR(d.value, -2.0 * std::log(0.5), 1e-12);
  EXPECT_NEAR(d.value, 1.3863, 1e-4);
}

TEST(Losses, BinaryReconstructionIsCrossEntropy) {
  const Matrix x = Matrix::from_rows({{1.0, 0.0}});
  const Matrix g = Matrix::from_rows({{0.25, 0.6}});
  const LossValue l = reconstruction_loss(x, g, Matrix(1, 2, 1.0), std::vector{FeatureKind::kBinary,
                                                                                   FeatureKind::kBinary});
  EXPECT_NEAR(l.value, -std::log(0.25), 1e-15);
}

TEST(Losses, FiniteAtSaturatedProbabilities) {
  const Matrix mask = Matrix::from_rows({{1, 0}, {0, 1}});
  const Matrix hard = Matrix::from_rows({{0, 1}, {1, 0}});
  EXPECT_TRUE(std::isfinite(discriminator_loss(mask, hard).value));
  EXPECT_TRUE(std::isfinite(generator_adversarial_loss(mask, hard).value));
  EXPECT_TRUE(std::isfinite(classification_loss(std::vector{1, 0}, Matrix::from_rows({{0}, {1}})).value));
  EXPECT_TRUE(std::isfinite(reconstruction_loss(mask, hard, mask, std::vector(2, FeatureKind::kBinary)).value));
}

/// Central differences of a loss with respect to its probability argument.
template <class F>
double loss_grad_error(F&& value, Matrix p, const Matrix& grad) {
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double keep = p[k];
    p[k] = keep + 1e-6;
    const double up = value(p);
    p[k] = keep - 1e-6;
    const double down = value(p);
    p[k] = keep;
    worst = std::max(worst, relative_error(grad[k], (up - down) / 2e-6));
  }
  return worst;
}

TEST(Losses, GradientsMatchDifferences) {
  const Matrix mask = random_mask(5, 4, 0.4, 4);
  const Matrix p = random_matrix(5, 4, 5, 0.05, 0.95);
  const Matrix x = random_matrix(5, 4, 6, 0.0, 1.0);
  const std::vector<FeatureKind> kinds{FeatureKind::kNumeric, FeatureKind::kBinary, FeatureKind::kNumeric,
                                       FeatureKind::kNumeric};
  EXPECT_LT(loss_grad_error([&](const Matrix& q) { return generator_adversarial_loss(mask, q).value; }, p,
                            generator_adversarial_loss(mask, p).grad),
            1e-6);
  EXPECT_LT(loss_grad_error([&](const Matrix& q) { return discriminator_loss(mask, q).value; }, p,
                            discriminator_loss(mask, p).grad),
            1e-6);
  EXPECT_LT(loss_grad_error([&](const Matrix& q) { return reconstruction_loss(x, q, mask, kinds).value; }, p,
                            reconstruction_loss(x, p, mask, kinds).grad),
            1e-6);
  const std::vector<int> y{1, 0, 0, 1, 1};
  const Matrix yp = random_matrix(5, 1, 7, 0.05, 0.95);
  EXPECT_LT(loss_grad_error([&](const Matrix& q) { return classification_loss(y, q).value; }, yp,
                            classification_loss(y, yp).grad),
            1e-6);
}

TEST(Losses, DiscriminatorGradCheckOverSeeds) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Network d({8, 6, 5, 4, 0.0, true}, seed);
    testing::jitter_biases(d, seed);
    const Matrix mask = random_mask(6, 4, 0.4, seed + 50);
    OutputLoss loss{[&](const Matrix& out) { return discriminator_loss(mask, out).value; },
                    [&](const Matrix& out) { return discriminator_loss(mask, out).grad; }};
    EXPECT_LT(grad_check(d, loss, random_matrix(6, 8, seed + 9, 0.0, 1.0), 1e-5), 1e-4) << seed;
  }
}

TEST(Losses, GeneratorObjectiveGradCheckOverSeeds) {
  // L_G + alpha L_R through a frozen discriminator, generator parameters only.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Network g({6, 7, 5, 3, 0.0, true}, seed);
    Network d({6, 7, 5, 3, 0.0, true}, seed + 1000);
    testing::jitter_biases(g, seed);
    testing::jitter_biases(d, seed + 1000);
    GainBatch b;
    b.x_tilde = random_matrix(5, 3, seed + 1, 0.0, 1.0);
    b.mask = random_mask(5, 3, 0.4, seed + 2);
    const NoiseAndHint nh = sample_noise_and_hint(b.mask, 0.9, seed + 3);
    b.z = nh.z;
    b.h = nh.h;
    const std::vector<FeatureKind> kinds(3, FeatureKind::kNumeric);
    const double alpha = 5.0;
    auto objective = [&](ForwardCache* gc, ForwardCache* dc) {
      const ImputationResult r = impute_batch(g, b, Mode::kTrain, 0, gc);
      const Matrix m_hat = d.forward(hconcat({&r.x_hat, &b.h}), Mode::kTrain, 0, dc);
      return std::make_tuple(r, m_hat);
    };
    ForwardCache gc, dc;
    auto [r, m_hat] = objective(&gc, &dc);
    const LossValue adv = generator_adversarial_loss(b.mask, m_hat);
    const LossValue rec = reconstruction_loss(b.x_tilde, r.g, b.mask, kinds);
    const Backprop db = d.backward(dc, adv.grad);
    Matrix dg(5, 3);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 3; ++j) dg(i, j) = (1.0 - b.mask(i, j)) * db.input(i, j) + alpha * rec.grad(i, j);
    const Backprop gb = g.backward(gc, dg);
    std::vector<Matrix*> blocks;
    for (auto& p : g.mutable_parameters()) blocks.push_back(&p);
    auto value = [&] {
      auto [r2, m2] = objective(nullptr, nullptr);
      return generator_adversarial_loss(b.mask, m2).value + alpha * reconstruction_loss(b.x_tilde, r2.g, b.mask, kinds).value;
    };
    EXPECT_LT(max_relative_gradient_error(blocks, value, gb.params, 1e-5), 1e-4) << seed;
  }
}

TEST(TrainGain, ZeroEpochsReturnsInitialization) {
  const MaskedDataset d = testing::random_dataset(40, 4, 0.2, 1);
  const GainModel m = train_gain(d, quick_hyper(0), 5);
  const GainModel init = init_gain(4, quick_hyper(0), 5);
  EXPECT_TRUE(m.generator == init.generator);
  EXPECT_TRUE(m.discriminator == init.discriminator);
  EXPECT_TRUE(m.history.empty());
}

TEST(TrainGain, DeterministicPerSeed) {
  const MaskedDataset d = testing::random_dataset(60, 4, 0.3, 2);
  const GainModel a = train_gain(d, quick_hyper(), 9);
  const GainModel b = train_gain(d, quick_hyper(), 9);
  EXPECT_TRUE(a.generator == b.generator);
  EXPECT_TRUE(a.discriminator == b.discriminator);
}

TEST(TrainGain, RejectsUnobservedFeature) {
  MaskedDataset d = testing::random_dataset(20, 3, 0.0, 3);
  for (std::size_t i = 0; i < 20; ++i) d.mask(i, 1) = 0.0;
  try {
    train_gain(d, quick_hyper(), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
}

struct TieRun {
  double gain = 0.0;
  double simple = 0.0;
};

TieRun tie_rmse(std::uint64_t seed, std::vector<GainEpochRecord>* history = nullptr) {
  SyntheticSpec s;
  s.n_samples = 1000;
  s.n_features = 6;
  s.tied_features = 3;
  s.correlation = 0.8;
  const MaskedDataset full = generate_synthetic(s, seed);
  const MaskedDataset masked = apply_mcar(full, 0.3, all_columns(6), seed + 1);
  const ScalerState st = fit_scaler(masked);
  const MaskedDataset scaled = scale(masked, st);
  const Matrix truth = scale_values(full.values, st);
  GainHyper h;
  h.alpha = 20.0;
  const GainModel m = train_gain(scaled, h, seed);
  if (history) *history = m.history;
  const Matrix g = impute_full(m.generator, scaled, seed);
  return {imputation_rmse(truth, g, scaled.mask, full.mask).rmse,
          imputation_rmse(truth, simple_impute(scaled), scaled.mask, full.mask).rmse};
}

TEST(TrainGain, BeatsMeanImputationOnLinearTies) {
  double gain = 0.0, simple = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TieRun r = tie_rmse(seed);
    gain += r.gain;
    simple += r.simple;
  }
  EXPECT_LT(gain, simple);
}

TEST(TrainGain, SmoothedLossesFall) {
  std::vector<GainEpochRecord> h;
  tie_rmse(11, &h);
  ASSERT_GE(h.size(), 20u);
  auto window = [&](std::size_t start, auto field) {
    double s = 0.0;
    for (std::size_t e = start; e < start + 5; ++e) s += h[e].*field;
    return s / 5.0;
  };
  EXPECT_LE(window(15, &GainEpochRecord::loss_r), window(0, &GainEpochRecord::loss_r));
  EXPECT_LE(window(15, &GainEpochRecord::loss_d), window(0, &GainEpochRecord::loss_d));
}

TEST(ImputeFull, CompleteDataUnchanged) {
  const MaskedDataset d = testing::random_dataset(15, 3, 0.0, 4);
  Network g({6, 5, 4, 3, 0.1, true}, 2);
  EXPECT_TRUE(bitwise_equal(impute_full(g, d, 1), d.values));
}

TEST(ImputeFull, ObservedCellsPreservedForTrainedGenerator) {
  const MaskedDataset d = testing::random_dataset(80, 5, 0.3, 5);
  const GainModel m = train_gain(d, quick_hyper(), 3);
  for (std::size_t draws : {1, 3}) {
    const Matrix out = impute_full(m.generator, d, 8, draws);
    for (std::size_t k = 0; k < out.size(); ++k)
      if (d.mask[k] == 1.0) EXPECT_EQ(std::bit_cast<std::uint64_t>(out[k]), std::bit_cast<std::uint64_t>(d.values[k]));
  }
}

TEST(ImputeFull, FirstDrawDoesNotDependOnDrawCount) {
  const MaskedDataset d = testing::random_dataset(10, 3, 0.5, 6);
  Network g({6, 5, 4, 3, 0.0, false}, 2);
  const Matrix first = mix_by_mask(d.mask, d.values, generator_draw(g, d, 4, 0));
  EXPECT_TRUE(bitwise_equal(impute_full(g, d, 4, 1), first));
  EXPECT_TRUE(bitwise_equal(impute_full(g, d, 4, 1), impute_full(g, d, 4, 1)));
}

TEST(ImputeFull, AveragingShrinksVariance) {
  MaskedDataset d = testing::random_dataset(1, 3, 0.0, 7);
  d.mask(0, 1) = 0.0;
  d.values(0, 1) = 0.0;
  Network g({6, 16, 16, 3, 0.0, false}, 3);
  auto variance = [&](std::size_t draws) {
    std::vector<double> v;
    for (std::uint64_t s = 0; s < 400; ++s) v.push_back(impute_full(g, d, 1000 + s, draws)(0, 1));
    const Summary sm = summarize(v);
    return sm.std * sm.std;
  };
  const double ratio = variance(64) / variance(1);
  EXPECT_GT(ratio, 1.0 / 64.0 / 1.6);
  EXPECT_LT(ratio, 1.0 / 64.0 * 1.6);
}

TEST(ImputeFull, WidthMismatchIsStateError) {
  Network g({6, 5, 4, 3, 0.0, false}, 2);
  try {
    impute_full(g, testing::random_dataset(5, 4, 0.2, 1), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kState);
  }
}

TEST(Generator, ColumnPermutationCommutes) {
  Network g({8, 6, 5, 4, 0.0, true}, 12);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  Network pg = g;
  auto& p = pg.mutable_parameters();
  const auto& q = g.parameters();
  for (std::size_t half = 0; half < 2; ++half)
    for (std::size_t j = 0; j < 4; ++j) {
      const std::size_t to = half * 4 + j, from = half * 4 + perm[j];
      p[0][to] = q[0][from];
      p[1][to] = q[1][from];
      for (std::size_t r = 0; r < 6; ++r) p[2](r, to) = q[2](r, from);
    }
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t c = 0; c < 5; ++c) p[6](j, c) = q[6](perm[j], c);
    p[7][j] = q[7][perm[j]];
  }
  GainBatch b;
  b.x_tilde = random_matrix(5, 4, 1, 0.0, 1.0);
  b.mask = random_mask(5, 4, 0.4, 2);
  b.z = random_matrix(5, 4, 3, 0.0, 1.0);
  GainBatch pb;
  pb.x_tilde = Matrix(5, 4);
  pb.mask = Matrix(5, 4);
  pb.z = Matrix(5, 4);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      pb.x_tilde(i, j) = b.x_tilde(i, perm[j]);
      pb.mask(i, j) = b.mask(i, perm[j]);
      pb.z(i, j) = b.z(i, perm[j]);
    }
  const Matrix g1 = impute_batch(g, b).g;
  const Matrix g2 = impute_batch(pg, pb).g;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(g2(i, j), g1(i, perm[j]), 1e-14);
}

}  // namespace
}  // namespace cgain
