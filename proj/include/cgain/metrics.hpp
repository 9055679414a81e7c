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
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cgain/error.hpp"
#include "cgain/matrix.hpp"

namespace cgain {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Predicted positive when score >= threshold.
inline ConfusionCounts confusion(std::span<const int> labels, std::span<const double> scores, double threshold) {
  require(labels.size() == scores.size(), ErrorKind::kUsage, "labels and scores differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) {
      pred ? ++c.tp : ++c.fn;
    } else {
      pred ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

/// F1 of one class; 0 when precision + recall is 0 or nothing is predicted.
inline double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

/// Unweighted mean of the class-0 and class-1 F1 scores.
inline double macro_f1(std::span<const int> labels, std::span<const double> scores, double threshold = 0.5) {
  require(!labels.empty(), ErrorKind::kUsage, "macro_f1 needs at least one sample");
  const ConfusionCounts c = confusion(labels, scores, threshold);
  const double f1_pos = f1_from_counts(c.tp, c.fp, c.fn);
  const double f1_neg = f1_from_counts(c.tn, c.fn, c.fp);
  return 0.5 * (f1_pos + f1_neg);
}

/// Mann-Whitney form: fraction of (positive, negative) pairs ranked
/// correctly, ties counting one half. Accumulated in integers, so the result
/// is the exact pair count divided once.
inline double auc_roc(std::span<const int> labels, std::span<const double> scores) {
  require(labels.size() == scores.size(), ErrorKind::kUsage, "labels and scores differ in length");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::uint64_t positives = 0, negatives = 0, twice_wins = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    std::uint64_t pos_here = 0, neg_here = 0;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) {
      labels[order[end]] == 1 ? ++pos_here : ++neg_here;
      ++end;
    }
    twice_wins += pos_here * (2 * neg_below + neg_here);
    neg_below += neg_here;
    positives += pos_here;
    negatives += neg_here;
    start = end;
  }
  require(positives > 0 && negatives > 0, ErrorKind::kMetricUndefined, "AUC-ROC needs both classes present");
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

struct RmseResult {
  double rmse = 0.0;
  std::size_t eligible = 0;
  /// Simulated-missing cells that were already missing, so have no truth.
  std::size_t undefined = 0;
};

/// RMSE over cells missing in `simulated_mask` but observed in `original_mask`.
inline RmseResult imputation_rmse(const Matrix& truth, const Matrix& imputed, const Matrix& simulated_mask,
                                  const Matrix& original_mask, std::span<const std::size_t> columns = {}) {
  require_same_shape(truth, imputed, "imputation_rmse");
  require_same_shape(truth, simulated_mask, "imputation_rmse");
  require_same_shape(truth, original_mask, "imputation_rmse");
  std::vector<char> use(truth.cols(), columns.empty() ? 1 : 0);
  for (std::size_t c : columns) {
    require(c < truth.cols(), ErrorKind::kUsage, "imputation_rmse column out of range");
    use[c] = 1;
  }
  RmseResult r;
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.rows(); ++i)
    for (std::size_t j = 0; j < truth.cols(); ++j) {
      if (!use[j] || simulated_mask(i, j) != 0.0) continue;
      if (original_mask(i, j) != 1.0) {
        ++r.undefined;
        continue;
      }
      const double e = imputed(i, j) - truth(i, j);
      sum += e * e;
      ++r.eligible;
    }
  require(r.eligible > 0, ErrorKind::kMetricUndefined, "no cells with known truth to score");
  r.rmse = std::sqrt(sum / static_cast<double>(r.eligible));
  return r;
}

/// Relative improvement rate: (model - best) / best.
inline double rir(double model_metric, double best_baseline_metric) {
  require(best_baseline_metric != 0.0, ErrorKind::kDivision, "RIR with a zero baseline");
  return (model_metric - best_baseline_metric) / best_baseline_metric;
}

/// Relative gap reduction rate: (model - best) / (upper - best).
inline double rgrr(double model_metric, double best_baseline_metric, double upper_bound_metric) {
  require(upper_bound_metric != best_baseline_metric, ErrorKind::kDivision, "RGRR with a zero gap");
  return (model_metric - best_baseline_metric) / (upper_bound_metric - best_baseline_metric);
}

/// One (method, missing rate, seed) evaluation.
struct RunResult {
  std::string method;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
  double macro_f1 = 0.0;
  double auc_roc = 0.0;
  std::optional<double> imputation_rmse;
  std::optional<double> tied_rmse;
};

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t count = 0;
};

inline Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

struct GroupSummary {
  std::string method;
  double missing_rate = 0.0;
  Summary macro_f1;
  Summary auc_roc;
  std::optional<Summary> imputation_rmse;
  std::optional<Summary> tied_rmse;
};

/// Groups by (method, missing_rate) in sorted key order.
inline std::vector<GroupSummary> aggregate(std::span<const RunResult> results) {
  std::map<std::pair<std::string, double>, std::vector<const RunResult*>> groups;
  for (const auto& r : results) groups[{r.method, r.missing_rate}].push_back(&r);
  std::vector<GroupSummary> out;
  for (const auto& [key, runs] : groups) {
    GroupSummary g;
    g.method = key.first;
    g.missing_rate = key.second;
    std::vector<double> f1, auc, rmse, tied;
    for (const RunResult* r : runs) {
      f1.push_back(r->macro_f1);
      auc.push_back(r->auc_roc);
      if (r->imputation_rmse) rmse.push_back(*r->imputation_rmse);
      if (r->tied_rmse) tied.push_back(*r->tied_rmse);
    }
    g.macro_f1 = summarize(f1);
    g.auc_roc = summarize(auc);
    if (!rmse.empty()) g.imputation_rmse = summarize(rmse);
    if (!tied.empty()) g.tied_rmse = summarize(tied);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace cgain
