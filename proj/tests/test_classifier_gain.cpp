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

#include <gtest/gtest.h>

#include "cgain/classifier_gain.hpp"
#include "checks.hpp"
#include "test_util.hpp"

namespace cgain {
namespace {

using testing::random_matrix;

Network zeroed(NetworkSpec spec) {
  Network n(spec, 1);
  for (auto& p : n.mutable_parameters()) p.fill(0.0);
  return n;
}

CgHyper small_hyper(std::size_t epochs = 2) {
  CgHyper h;
  h.gain.epochs = epochs;
  h.gain.batch_size = 16;
  h.gain.generator = {12, 8, 0.1};
  h.gain.discriminator = {12, 8, 0.1};
  h.classifier = {8, 4, 0.1};
  return h;
}

TEST(Classify, ZeroWeightsGiveHalf) {
  const Network c = zeroed({3, 4, 4, 1, 0.0, false});
  for (double p : classify(c, random_matrix(5, 3, 1))) EXPECT_EQ(p, 0.5);
}

TEST(Classify, MonotoneInSingleInput) {
  Network c = zeroed({1, 1, 1, 1, 0.0, false});
  for (auto& p : c.mutable_parameters())
    if (p.rows() == 1 && p.cols() == 1) p[0] = 1.0;
  c.mutable_parameters()[1][0] = 0.0;
  c.mutable_parameters()[3][0] = 0.0;
  c.mutable_parameters()[5][0] = 0.0;
  const auto y = classify(c, Matrix::from_rows({{0.1}, {0.5}, {0.9}}));
  EXPECT_LT(y[0], y[1]);
  EXPECT_LT(y[1], y[2]);
}

TEST(Classify, IdenticalRowsGiveIdenticalScores) {
  const Network c({3, 5, 4, 1, 0.1, true}, 4);
  const Matrix x = Matrix::from_rows({{0.2, 0.4, 0.6}, {0.2, 0.4, 0.6}, {0.9, 0.1, 0.3}});
  const auto y = classify(c, x);
  EXPECT_EQ(y[0], y[1]);
}

TEST(Discriminate, ZeroWeightsGiveHalf) {
  const Network d = zeroed({7, 4, 4, 3, 0.0, false});
  const Matrix m = discriminate(d, random_matrix(4, 3, 1), random_matrix(4, 1, 2, 0, 1), random_matrix(4, 3, 3));
  for (double v : m.flat()) EXPECT_EQ(v, 0.5);
}

TEST(Discriminate, DependsOnClassifierOutput) {
  std::size_t sensitive = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Network d({7, 8, 6, 3, 0.0, false}, seed);
    const Matrix x = random_matrix(1, 3, seed + 1, 0, 1);
    const Matrix h = random_matrix(1, 3, seed + 2, 0, 1);
    const Matrix a = discriminate(d, x, Matrix(1, 1, 0.1), h);
    const Matrix b = discriminate(d, x, Matrix(1, 1, 0.9), h);
    sensitive += max_abs_difference(a, b) > 0.0;
  }
  EXPECT_GE(sensitive, 19u);
}

TEST(Discriminate, RowPermutationCommutesInInference) {
  const Network d({7, 8, 6, 3, 0.1, true}, 5);
  const Matrix x = random_matrix(3, 3, 1, 0, 1), y = random_matrix(3, 1, 2, 0, 1), h = random_matrix(3, 3, 3, 0, 1);
  const std::vector<std::size_t> perm{2, 0, 1};
  const Matrix a = discriminate(d, x, y, h);
  const Matrix b = discriminate(d, select_rows(x, perm), select_rows(y, perm), select_rows(h, perm));
  EXPECT_TRUE(testing::bitwise_equal(select_rows(a, perm), b));
}

TEST(Discriminate, WrongWidthRejected) {
  const Network d({6, 4, 4, 3, 0.0, false}, 1);
  EXPECT_THROW(discriminate(d, random_matrix(2, 3, 1), Matrix(2, 1), random_matrix(2, 3, 2)), Error);
}

TEST(CombinedLoss, Decomposition) {
  const Matrix mask = testing::random_mask(4, 3, 0.4, 1);
  const Matrix m_hat = random_matrix(4, 3, 2, 0.1, 0.9);
  const Matrix x = random_matrix(4, 3, 3, 0, 1), g = random_matrix(4, 3, 4, 0, 1);
  const std::vector<FeatureKind> kinds(3, FeatureKind::kNumeric);
  const std::vector<int> y{1, 0, 1, 0};
  const Matrix y_hat = random_matrix(4, 1, 5, 0.1, 0.9);
  const CgLoss zero = combined_cg_loss(mask, m_hat, x, g, kinds, y, y_hat, 0.0, 0.0);
  EXPECT_EQ(zero.total, generator_adversarial_loss(mask, m_hat).value);
  const CgLoss full = combined_cg_loss(mask, m_hat, x, g, kinds, y, y_hat, 20.0, 1.0);
  EXPECT_NEAR(full.total, full.adversarial + 20.0 * full.reconstruction + full.classification, 1e-12);
  const CgLoss half = combined_cg_loss(Matrix(1, 1, 1.0), Matrix(1, 1, 0.5), Matrix(1, 1), Matrix(1, 1),
                                       std::vector{FeatureKind::kNumeric}, std::vector{1}, Matrix(1, 1, 0.5), 0.0, 1.0);
  EXPECT_NEAR(half.classification, std::log(2.0), 1e-15);
  EXPECT_NEAR(half.total, std::log(2.0), 1e-15);
}

TEST(TrainCg, ZeroEpochsReturnsInitialization) {
  const MaskedDataset d = testing::random_dataset(30, 3, 0.2, 1);
  const TrainedTriple t = train_classifier_gain(d, small_hyper(0), 4);
  const TrainedTriple init = init_classifier_gain(3, small_hyper(0), 4);
  EXPECT_TRUE(t.generator == init.generator);
  EXPECT_TRUE(t.classifier == init.classifier);
  EXPECT_TRUE(t.discriminator == init.discriminator);
  EXPECT_TRUE(t.history.empty());
}

TEST(TrainCg, HistoryAndDeterminism) {
  const MaskedDataset d = testing::random_dataset(64, 3, 0.3, 2);
  const TrainedTriple a = train_classifier_gain(d, small_hyper(3), 7);
  const TrainedTriple b = train_classifier_gain(d, small_hyper(3), 7);
  ASSERT_EQ(a.history.size(), 3u);
  EXPECT_TRUE(a.generator == b.generator && a.classifier == b.classifier && a.discriminator == b.discriminator);
  for (const auto& r : a.history) {
    EXPECT_TRUE(std::isfinite(r.loss_g_adv) && std::isfinite(r.loss_d) && std::isfinite(r.loss_c));
    EXPECT_GE(r.train_macro_f1, 0.0);
    EXPECT_LE(r.train_macro_f1, 1.0);
  }
}

TEST(TrainCg, RejectsMismatchedNetworks) {
  TrainedTriple t = init_classifier_gain(4, small_hyper(), 1);
  EXPECT_THROW(train_classifier_gain(t, testing::random_dataset(20, 3, 0.2, 1), small_hyper(), 1), Error);
}

TEST(TrainCg, CombinedObjectiveGradientOverSeeds) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    EXPECT_LT(testing::combined_objective_grad_error(seed), 1e-4) << seed;
}

TEST(TrainCg, PinnedObjectiveReducesToGain) {
  for (std::uint64_t seed : {1, 2}) {
    const double gap = testing::pinned_equivalence_gap(seed, 100);
    EXPECT_GE(gap, 0.0);
    EXPECT_LT(gap, 1e-10);
  }
}

TEST(TrainCg, FreezeContract) {
  const testing::FreezeReport r = testing::watch_freeze(3, 2);
  EXPECT_EQ(r.generator_steps, 12u);
  EXPECT_EQ(r.discriminator_steps, 6u);
  EXPECT_EQ(r.violations, 0u);
}

TEST(Predict, CompleteInputKeepsValues) {
  const MaskedDataset d = testing::random_dataset(12, 3, 0.0, 3);
  const TrainedTriple t = init_classifier_gain(3, small_hyper(), 2);
  const Prediction p = predict(t, d, 5);
  EXPECT_TRUE(testing::bitwise_equal(p.x_hat, d.values));
  EXPECT_EQ(p.y_hat, classify(t.classifier, d.values));
}

TEST(Predict, DeterministicAndIgnoresLabels) {
  const MaskedDataset d = testing::random_dataset(40, 4, 0.3, 4);
  const TrainedTriple t = train_classifier_gain(d, small_hyper(2), 3);
  MaskedDataset flipped = d;
  for (int& y : flipped.labels) y = 1 - y;
  for (std::size_t draws : {1, 4}) {
    const Prediction a = predict(t, d, 9, draws);
    const Prediction b = predict(t, d, 9, draws);
    const Prediction c = predict(t, without_labels(flipped), 9, draws);
    EXPECT_TRUE(testing::bitwise_equal(a.x_hat, b.x_hat));
    EXPECT_EQ(a.y_hat, b.y_hat);
    EXPECT_EQ(a.y_hat, c.y_hat);
    for (std::size_t k = 0; k < d.values.size(); ++k)
      if (d.mask[k] == 1.0) EXPECT_EQ(a.x_hat[k], d.values[k]);
  }
}

TEST(Predict, SingleObservedFeatureRowsAreFinite) {
  MaskedDataset d = testing::random_dataset(6, 4, 0.0, 5);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (j != i % 4) {
        d.mask(i, j) = 0.0;
        d.values(i, j) = 0.0;
      }
  const TrainedTriple t = init_classifier_gain(4, small_hyper(), 6);
  const Prediction p = predict(t, d, 1, 3);
  EXPECT_TRUE(p.x_hat.all_finite());
  for (double y : p.y_hat) EXPECT_TRUE(y > 0.0 && y < 1.0);
}

TEST(Predict, FeatureCountMismatchIsStateError) {
  const TrainedTriple t = init_classifier_gain(4, small_hyper(), 6);
  try {
    predict(t, testing::random_dataset(5, 3, 0.1, 1), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kState);
  }
}

}  // namespace
}  // namespace cgain
