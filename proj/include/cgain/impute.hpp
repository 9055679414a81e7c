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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cgain/data.hpp"
#include "cgain/error.hpp"
#include "cgain/matrix.hpp"

namespace cgain {

/// Column means (numeric) or modes (binary, ties -> 1) of observed cells.
class SimpleImputer {
 public:
  static SimpleImputer fit(const MaskedDataset& data) {
    SimpleImputer imp;
    imp.fill_.resize(data.cols());
    for (std::size_t j = 0; j < data.cols(); ++j) {
      double sum = 0.0;
      double count = 0.0;
      for (std::size_t i = 0; i < data.rows(); ++i) {
        if (data.mask(i, j) != 1.0) continue;
        sum += data.values(i, j);
        count += 1.0;
      }
      require(count > 0.0, ErrorKind::kData, "feature '" + data.names[j] + "' has no observed values");
      const double mean = sum / count;
      imp.fill_[j] = data.kinds[j] == FeatureKind::kBinary ? (mean >= 0.5 ? 1.0 : 0.0) : mean;
    }
    return imp;
  }

  const std::vector<double>& fill_values() const noexcept { return fill_; }

  Matrix transform(const MaskedDataset& data) const {
    require(data.cols() == fill_.size(), ErrorKind::kShape, "simple imputer width mismatch");
    Matrix out = data.values;
    for (std::size_t i = 0; i < data.rows(); ++i)
      for (std::size_t j = 0; j < data.cols(); ++j)
        if (data.mask(i, j) != 1.0) out(i, j) = fill_[j];
    return out;
  }

 private:
  std::vector<double> fill_;
};

inline Matrix simple_impute(const MaskedDataset& data) { return SimpleImputer::fit(data).transform(data); }

struct ChainedImputerConfig {
  std::size_t max_rounds = 100;
  double tolerance = 1e-3;
  double ridge = 1e-3;

  void validate() const {
    require(max_rounds >= 1, ErrorKind::kConfig, "max_rounds must be >= 1");
    require(tolerance > 0.0, ErrorKind::kConfig, "tolerance must be positive");
    require(ridge >= 0.0, ErrorKind::kConfig, "ridge regularizer must be non-negative");
  }
};

struct ChainedImputerDiagnostics {
  std::size_t rounds = 0;
  bool converged = false;
  /// Max absolute change of any imputed cell, one entry per round.
  std::vector<double> round_changes;
  std::vector<std::string> log;
};

/// Iterative per-feature ridge regression imputation, mean-initialized.
///
/// `fit` runs the rounds on the training data and records every regression
/// it fits; `transform` replays those regressions in the same order on new
/// data, starting from the training means.
class ChainedImputer {
 public:
  static ChainedImputer fit(const MaskedDataset& data, const ChainedImputerConfig& config,
                            Matrix* completed = nullptr) {
    config.validate();
    ChainedImputer imp;
    imp.initial_ = SimpleImputer::fit(data);
    imp.kinds_ = data.kinds;
    Matrix x = imp.initial_.transform(data);
    for (std::size_t j = 0; j < data.cols(); ++j) imp.means_.push_back(imp.initial_.fill_values()[j]);

    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t j = 0; j < data.cols(); ++j) {
      double missing = 0.0;
      for (std::size_t i = 0; i < data.rows(); ++i) missing += 1.0 - data.mask(i, j);
      if (missing > 0.0) order.emplace_back(missing, j);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    for (std::size_t round = 0; !order.empty() && round < config.max_rounds; ++round) {
      double change = 0.0;
      std::vector<Step> steps;
      for (const auto& [missing, j] : order) {
        Step step = imp.fit_feature(data, x, j, config.ridge, round);
        for (std::size_t i = 0; i < data.rows(); ++i) {
          if (data.mask(i, j) == 1.0) continue;
          const double v = imp.predict(step, x, i);
          change = std::max(change, std::abs(v - x(i, j)));
          x(i, j) = v;
        }
        steps.push_back(std::move(step));
      }
      imp.rounds_.push_back(std::move(steps));
      imp.diagnostics_.round_changes.push_back(change);
      imp.diagnostics_.rounds = round + 1;
      if (change < config.tolerance) {
        imp.diagnostics_.converged = true;
        break;
      }
    }
    if (order.empty()) imp.diagnostics_.converged = true;
    if (completed) *completed = std::move(x);
    return imp;
  }

  Matrix transform(const MaskedDataset& data) const {
    require(data.cols() == kinds_.size(), ErrorKind::kShape, "chained imputer width mismatch");
    Matrix x = initial_.transform(data);
    for (const auto& steps : rounds_) {
      for (const auto& step : steps) {
        for (std::size_t i = 0; i < data.rows(); ++i)
          if (data.mask(i, step.feature) != 1.0) x(i, step.feature) = predict(step, x, i);
      }
    }
    return x;
  }

  const ChainedImputerDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  struct Step {
    std::size_t feature = 0;
    bool fallback = false;
    std::vector<double> coef;  // intercept first, then one per other feature in column order
  };

  Step fit_feature(const MaskedDataset& data, const Matrix& x, std::size_t j, double ridge, std::size_t round) {
    Step step;
    step.feature = j;
    const std::size_t d = data.cols();
    const std::size_t p = d;  // intercept + (d - 1) predictors
    std::size_t n_obs = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) n_obs += data.mask(i, j) == 1.0 ? 1 : 0;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(n_obs), static_cast<Eigen::Index>(p));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n_obs));
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (data.mask(i, j) != 1.0) continue;
      a(r, 0) = 1.0;
      Eigen::Index c = 1;
      for (std::size_t k = 0; k < d; ++k)
        if (k != j) a(r, c++) = x(i, k);
      y(r) = x(i, j);
      ++r;
    }
    Eigen::MatrixXd gram = a.transpose() * a;
    for (Eigen::Index k = 1; k < static_cast<Eigen::Index>(p); ++k) gram(k, k) += ridge;
    const Eigen::VectorXd rhs = a.transpose() * y;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    Eigen::VectorXd beta;
    const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
    bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive() &&
              pivots.minCoeff() > 1e-12 * std::max(pivots.maxCoeff(), 1.0);
    if (ok) {
      beta = ldlt.solve(rhs);
      ok = beta.allFinite() && (gram * beta - rhs).norm() <= 1e-6 * (1.0 + rhs.norm());
    }
    if (!ok) {
      step.fallback = true;
      diagnostics_.log.push_back("round " + std::to_string(round + 1) + ": feature '" + data.names[j] +
                                 "' regression singular, using column mean");
      return step;
    }
    step.coef.assign(beta.data(), beta.data() + beta.size());
    return step;
  }

  double predict(const Step& step, const Matrix& x, std::size_t i) const {
    if (step.fallback) return means_[step.feature];
    double v = step.coef[0];
    std::size_t c = 1;
    for (std::size_t k = 0; k < x.cols(); ++k)
      if (k != step.feature) v += step.coef[c++] * x(i, k);
    if (kinds_[step.feature] == FeatureKind::kBinary) v = std::clamp(v, 0.0, 1.0);
    return v;
  }

  SimpleImputer initial_;
  std::vector<FeatureKind> kinds_;
  std::vector<double> means_;
  std::vector<std::vector<Step>> rounds_;
  ChainedImputerDiagnostics diagnostics_;
};

inline Matrix mice_impute(const MaskedDataset& data, const ChainedImputerConfig& config,
                          ChainedImputerDiagnostics* diagnostics = nullptr) {
  Matrix out;
  const ChainedImputer imp = ChainedImputer::fit(data, config, &out);
  if (diagnostics) *diagnostics = imp.diagnostics();
  return out;
}

}  // namespace cgain
