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


// Experiment harness: missing-rate sweeps, learning-rate search, reports and
// density export.

#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cgain/classifier.hpp"
#include "cgain/classifier_gain.hpp"
#include "cgain/config.hpp"
#include "cgain/data.hpp"
#include "cgain/error.hpp"
#include "cgain/gain.hpp"
#include "cgain/impute.hpp"
#include "cgain/metrics.hpp"
#include "json.hpp"

namespace cgain {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSweepFormat = "cgain-sweep-1";

/// One evaluation; failed runs keep their key and carry the error text.
struct RunRecord {
  RunResult result;
  bool failed = false;
  std::string error;
};

struct GridCandidate {
  double lr = 0.0;
  std::optional<double> dev_macro_f1;  // empty when the run failed
};

struct GridChoice {
  std::string method;
  double chosen_lr = 0.0;
  std::vector<GridCandidate> candidates;
};

struct SweepReport {
  std::string code_version = kCodeVersion;
  std::string config_hash;
  std::string config_text;
  std::vector<std::string> methods;
  std::vector<double> missing_rates;
  std::vector<std::uint64_t> seeds;
  std::vector<GridChoice> grid;
  std::vector<RunRecord> runs;
};

/// Hyper-parameters actually used by one method.
struct MethodHyper {
  ClassifierHyper classifier;
  GainHyper gain;
  CgHyper classifier_gain;
};

// ---------------------------------------------------------------------------
// Workers

/// Runs `count` independent jobs on up to `workers` threads. Jobs must write
/// only to their own slots; any exception escaping a job is rethrown.
inline void run_parallel(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Per-seed data

namespace seeds {
inline constexpr std::uint64_t kData = 0xD17A;
inline constexpr std::uint64_t kSplit = 0x5911;
inline constexpr std::uint64_t kMask = 0x3A5C;
inline constexpr std::uint64_t kModel = 0x30DE;
inline constexpr std::uint64_t kImputeTrain = 0x1A11;
inline constexpr std::uint64_t kImputeTest = 0x1A7E;
}  // namespace seeds

inline std::uint64_t method_id(const std::string& method) {
  const auto& m = known_methods();
  return static_cast<std::uint64_t>(std::find(m.begin(), m.end(), method) - m.begin());
}

inline std::uint64_t rate_key(double rate) { return std::bit_cast<std::uint64_t>(rate); }

struct SeedData {
  MaskedDataset full;
  std::vector<SplitParts> parts;
  std::vector<std::size_t> mask_columns;
  std::vector<std::size_t> tied_columns;
};

inline MaskedDataset load_source(const DataSourceConfig& src, std::uint64_t seed) {
  if (src.kind == DataSourceConfig::Kind::kSynthetic)
    return generate_synthetic(src.synthetic, derive_seed(seed, {seeds::kData}));
  return load_csv(src.path, src.na_token, src.label_column, src.kind_overrides);
}

inline std::vector<std::size_t> resolve_columns(const MaskedDataset& data, const std::vector<std::string>& names) {
  if (names.empty()) return all_columns(data.cols());
  std::vector<std::size_t> cols;
  for (const auto& n : names) {
    const auto it = std::find(data.names.begin(), data.names.end(), n);
    require(it != data.names.end(), ErrorKind::kConfig, "mask feature '" + n + "' not in data");
    cols.push_back(static_cast<std::size_t>(it - data.names.begin()));
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

/// Columns in an exact linear relation: every tied column and its source.
inline std::vector<std::size_t> tied_columns(const DataSourceConfig& src) {
  std::vector<std::size_t> cols;
  if (src.kind != DataSourceConfig::Kind::kSynthetic) return cols;
  const std::size_t d = src.synthetic.n_features, t = src.synthetic.tied_features;
  for (std::size_t k = 0; k < t; ++k) cols.push_back(k);
  for (std::size_t k = d - t; k < d; ++k) cols.push_back(k);
  return cols;
}

inline SeedData prepare_seed(const ExperimentConfig& c, std::uint64_t seed, const MaskedDataset* csv_cache) {
  SeedData s;
  s.full = csv_cache ? *csv_cache : load_source(c.data, seed);
  SplitPlan plan = c.split;
  plan.seed = derive_seed(seed, {seeds::kSplit, c.split.seed});
  s.parts = split(s.full, plan);
  s.mask_columns = resolve_columns(s.full, c.mask_features);
  s.tied_columns = tied_columns(c.data);
  return s;
}

// ---------------------------------------------------------------------------
// Single evaluations

/// Test-side scores for one split part.
struct PartOutcome {
  std::vector<int> labels;
  std::vector<double> scores;
  std::optional<RmseResult> rmse;
  std::optional<RmseResult> tied_rmse;
};

/// Fits `method` on `train_rows` and scores `eval_rows`. The evaluation rows
/// reach the imputers and networks with their labels removed.
inline PartOutcome evaluate_part(const std::string& method, const MethodHyper& hp, const ExperimentConfig& c,
                                 const SeedData& sd, const MaskedDataset& masked, std::span<const std::size_t> train_rows,
                                 std::span<const std::size_t> eval_rows, std::uint64_t model_seed) {
  const bool upper = method == "upper_bound";
  const MaskedDataset& source = upper ? sd.full : masked;
  const MaskedDataset train_raw = subset_rows(source, train_rows);
  const MaskedDataset eval_raw = subset_rows(source, eval_rows);
  const ScalerState scaler = fit_scaler(train_raw);
  const MaskedDataset train = scale(train_raw, scaler);
  const MaskedDataset eval = without_labels(scale(eval_raw, scaler));

  PartOutcome out;
  Matrix eval_completed;
  if (method == "simple" || upper) {
    const SimpleImputer imp = SimpleImputer::fit(train);
    const ClassifierModel clf = train_classifier(imp.transform(train), train.labels, hp.classifier, model_seed);
    eval_completed = imp.transform(eval);
    out.scores = predict_proba(clf.net, eval_completed);
  } else if (method == "mice") {
    Matrix train_completed;
    const ChainedImputer imp = ChainedImputer::fit(train, c.mice, &train_completed);
    const ClassifierModel clf = train_classifier(train_completed, train.labels, hp.classifier, model_seed);
    eval_completed = imp.transform(eval);
    out.scores = predict_proba(clf.net, eval_completed);
  } else if (method == "gain") {
    const GainModel g = train_gain(train, hp.gain, model_seed);
    const Matrix train_completed =
        impute_full(g.generator, train, derive_seed(model_seed, {seeds::kImputeTrain}), c.n_draws);
    const ClassifierModel clf = train_classifier(train_completed, train.labels, hp.classifier, model_seed);
    eval_completed = impute_full(g.generator, eval, derive_seed(model_seed, {seeds::kImputeTest}), c.n_draws);
    out.scores = predict_proba(clf.net, eval_completed);
  } else if (method == "classifier_gain") {
    TrainedTriple t = train_classifier_gain(train, hp.classifier_gain, model_seed);
    t.scaler = scaler;
    Prediction p = predict(t, eval, derive_seed(model_seed, {seeds::kImputeTest}), c.n_draws);
    eval_completed = std::move(p.x_hat);
    out.scores = std::move(p.y_hat);
  } else {
    fail(ErrorKind::kConfig, "unknown method '" + method + "'");
  }
  for (double v : out.scores) require(std::isfinite(v), ErrorKind::kNumeric, method + " produced a non-finite score");
  out.labels.assign(eval_raw.labels.begin(), eval_raw.labels.end());

  if (!upper) {
    const MaskedDataset truth_raw = subset_rows(sd.full, eval_rows);
    const Matrix truth = scale_values(truth_raw.values, scaler);
    auto score_cells = [&](std::span<const std::size_t> cols) -> std::optional<RmseResult> {
      try {
        return imputation_rmse(truth, eval_completed, eval.mask, truth_raw.mask, cols);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kMetricUndefined) return std::nullopt;
        throw;
      }
    };
    out.rmse = score_cells({});
    if (!sd.tied_columns.empty()) out.tied_rmse = score_cells(sd.tied_columns);
  }
  return out;
}

/// Pools test predictions and imputation errors over all split parts.
inline RunResult evaluate_run(const std::string& method, const MethodHyper& hp, const ExperimentConfig& c,
                              const SeedData& sd, double rate, std::uint64_t seed) {
  const bool upper = method == "upper_bound";
  const MaskedDataset masked =
      upper ? sd.full : apply_mcar(sd.full, rate, sd.mask_columns, derive_seed(seed, {seeds::kMask, rate_key(rate)}));
  const std::uint64_t model_seed = derive_seed(seed, {seeds::kModel, method_id(method), rate_key(rate)});
  std::vector<int> labels;
  std::vector<double> scores;
  struct Pool {
    double sum = 0.0;
    std::size_t n = 0;
    bool any = false;
    void add(const std::optional<RmseResult>& r) {
      if (!r) return;
      any = true;
      sum += r->rmse * r->rmse * static_cast<double>(r->eligible);
      n += r->eligible;
    }
    std::optional<double> value() const {
      if (!any || n == 0) return std::nullopt;
      return std::sqrt(sum / static_cast<double>(n));
    }
  } rmse, tied;
  for (std::size_t p = 0; p < sd.parts.size(); ++p) {
    const auto& part = sd.parts[p];
    const PartOutcome o = evaluate_part(method, hp, c, sd, masked, part.train, part.test,
                                        sd.parts.size() == 1 ? model_seed : derive_seed(model_seed, {p}));
    labels.insert(labels.end(), o.labels.begin(), o.labels.end());
    scores.insert(scores.end(), o.scores.begin(), o.scores.end());
    rmse.add(o.rmse);
    tied.add(o.tied_rmse);
  }
  RunResult r;
  r.method = method;
  r.missing_rate = upper ? 0.0 : rate;
  r.seed = seed;
  r.macro_f1 = macro_f1(labels, scores);
  r.auc_roc = auc_roc(labels, scores);
  r.imputation_rmse = rmse.value();
  r.tied_rmse = tied.value();
  return r;
}

// ---------------------------------------------------------------------------
// Learning-rate search

inline MethodHyper base_hyper(const ExperimentConfig& c) { return {c.classifier, c.gain, c.classifier_gain}; }

/// The candidate rate replaces every learning rate the method trains with
/// except the downstream classifier's for the GAIN pipeline.
inline MethodHyper with_learning_rate(MethodHyper hp, const std::string& method, double lr) {
  if (method == "gain") {
    hp.gain.lr_g = hp.gain.lr_d = lr;
  } else if (method == "classifier_gain") {
    hp.classifier_gain.gain.lr_g = hp.classifier_gain.gain.lr_d = hp.classifier_gain.lr_c = lr;
  } else {
    hp.classifier.lr = lr;
  }
  return hp;
}

/// Dev macro-F1 per candidate for every configured method, evaluated once at
/// the first missing rate and first seed. Ties go to the smaller rate.
inline std::vector<GridChoice> grid_search(const ExperimentConfig& c, const SeedData& sd, std::size_t workers) {
  require(!sd.parts.empty() && !sd.parts.front().dev.empty(), ErrorKind::kConfig,
          "learning-rate search needs a dev split");
  std::vector<double> lrs = c.grid_lrs;
  std::sort(lrs.begin(), lrs.end());
  lrs.erase(std::unique(lrs.begin(), lrs.end()), lrs.end());
  const double rate = c.missing_rates.front();
  const std::uint64_t seed = c.seeds.front();
  const auto& part = sd.parts.front();

  std::vector<GridChoice> choices(c.methods.size());
  for (std::size_t m = 0; m < c.methods.size(); ++m) {
    choices[m].method = c.methods[m];
    choices[m].candidates.resize(lrs.size());
  }
  run_parallel(c.methods.size() * lrs.size(), workers, [&](std::size_t job) {
    const std::size_t m = job / lrs.size(), k = job % lrs.size();
    const std::string& method = c.methods[m];
    GridCandidate& cand = choices[m].candidates[k];
    cand.lr = lrs[k];
    try {
      const bool upper = method == "upper_bound";
      const MaskedDataset masked =
          upper ? sd.full
                : apply_mcar(sd.full, rate, sd.mask_columns, derive_seed(seed, {seeds::kMask, rate_key(rate)}));
      const PartOutcome o = evaluate_part(method, with_learning_rate(base_hyper(c), method, lrs[k]), c, sd, masked,
                                          part.train, part.dev,
                                          derive_seed(seed, {seeds::kModel, method_id(method), rate_key(rate)}));
      cand.dev_macro_f1 = macro_f1(o.labels, o.scores);
    } catch (const Error&) {
      cand.dev_macro_f1.reset();
    }
  });
  for (auto& ch : choices) {
    std::optional<double> best;
    ch.chosen_lr = lrs.front();
    for (const auto& cand : ch.candidates) {
      if (cand.dev_macro_f1 && (!best || *cand.dev_macro_f1 > *best)) {
        best = cand.dev_macro_f1;
        ch.chosen_lr = cand.lr;
      }
    }
  }
  return choices;
}

// ---------------------------------------------------------------------------
// Sweep

/// Evaluates every (rate, seed, method) cell plus one upper-bound run per
/// seed. A failing run is recorded and the sweep continues. The result does
/// not depend on the worker count.
inline SweepReport run_sweep(const ExperimentConfig& c, std::size_t workers = 0) {
  c.validate();
  workers = resolve_workers(workers ? workers : c.workers);
  SweepReport rep;
  rep.config_text = canonical_text(c);
  rep.config_hash = config_hash(c);
  rep.methods = c.methods;
  rep.missing_rates = c.missing_rates;
  rep.seeds = c.seeds;

  std::optional<MaskedDataset> csv;
  if (c.data.kind == DataSourceConfig::Kind::kCsv) csv = load_source(c.data, 0);
  std::vector<SeedData> per_seed;
  for (std::uint64_t s : c.seeds) per_seed.push_back(prepare_seed(c, s, csv ? &*csv : nullptr));

  std::map<std::string, MethodHyper> hyper;
  for (const auto& m : c.methods) hyper[m] = base_hyper(c);
  if (!c.grid_lrs.empty()) {
    rep.grid = grid_search(c, per_seed.front(), workers);
    for (const auto& ch : rep.grid) hyper[ch.method] = with_learning_rate(base_hyper(c), ch.method, ch.chosen_lr);
  }

  struct Job {
    std::string method;
    double rate;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  for (double rate : c.missing_rates)
    for (std::size_t s = 0; s < c.seeds.size(); ++s)
      for (const auto& m : c.methods)
        if (m != "upper_bound") jobs.push_back({m, rate, s});
  if (c.has_method("upper_bound"))
    for (std::size_t s = 0; s < c.seeds.size(); ++s) jobs.push_back({"upper_bound", 0.0, s});

  rep.runs.resize(jobs.size());
  run_parallel(jobs.size(), workers, [&](std::size_t i) {
    const Job& j = jobs[i];
    RunRecord& rec = rep.runs[i];
    rec.result.method = j.method;
    rec.result.missing_rate = j.rate;
    rec.result.seed = c.seeds[j.seed_index];
    try {
      rec.result = evaluate_run(j.method, hyper.at(j.method), c, per_seed[j.seed_index], j.rate, rec.result.seed);
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });
  return rep;
}

// ---------------------------------------------------------------------------
// Aggregation and relative rates

struct CellKey {
  std::string method;
  double rate;
  auto operator<=>(const CellKey&) const = default;
};

struct Cell {
  std::vector<const RunRecord*> runs;
  std::size_t failures = 0;
  std::optional<GroupSummary> summary;  // only for complete cells
};

inline std::map<CellKey, Cell> collect_cells(const SweepReport& rep) {
  std::map<CellKey, Cell> cells;
  for (const auto& r : rep.runs) {
    Cell& cell = cells[{r.result.method, r.result.missing_rate}];
    cell.runs.push_back(&r);
    if (r.failed) ++cell.failures;
  }
  for (auto& [key, cell] : cells) {
    if (cell.failures != 0 || cell.runs.size() != rep.seeds.size()) continue;
    std::vector<RunResult> results;
    for (const RunRecord* r : cell.runs) results.push_back(r->result);
    cell.summary = aggregate(results).front();
  }
  return cells;
}

enum class Metric { kMacroF1, kAucRoc, kRmse, kTiedRmse };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::kMacroF1: return "macro_f1";
    case Metric::kAucRoc: return "auc_roc";
    case Metric::kRmse: return "imputation_rmse";
    case Metric::kTiedRmse: return "tied_rmse";
  }
  return "";
}

inline std::optional<Summary> metric_of(const GroupSummary& g, Metric m) {
  switch (m) {
    case Metric::kMacroF1: return g.macro_f1;
    case Metric::kAucRoc: return g.auc_roc;
    case Metric::kRmse: return g.imputation_rmse;
    case Metric::kTiedRmse: return g.tied_rmse;
  }
  return std::nullopt;
}

/// Classifier-GAIN against the best complete baseline cell at one rate.
struct RelativeRow {
  double missing_rate = 0.0;
  Metric metric = Metric::kMacroF1;
  std::string best_baseline;
  double baseline_mean = 0.0;
  double model_mean = 0.0;
  std::optional<double> upper_mean;
  std::optional<double> rir;
  std::optional<double> rgrr;
};

inline std::vector<RelativeRow> relative_rows(const SweepReport& rep, const std::map<CellKey, Cell>& cells) {
  std::vector<RelativeRow> rows;
  auto mean_of = [&](const std::string& method, double rate, Metric m) -> std::optional<double> {
    const auto it = cells.find({method, rate});
    if (it == cells.end() || !it->second.summary) return std::nullopt;
    const auto s = metric_of(*it->second.summary, m);
    return s ? std::optional<double>(s->mean) : std::nullopt;
  };
  for (double rate : rep.missing_rates) {
    for (Metric m : {Metric::kMacroF1, Metric::kAucRoc}) {
      const auto model = mean_of("classifier_gain", rate, m);
      if (!model) continue;
      RelativeRow row;
      row.missing_rate = rate;
      row.metric = m;
      row.model_mean = *model;
      bool found = false;
      for (const auto& method : rep.methods) {
        if (!is_baseline(method)) continue;
        const auto v = mean_of(method, rate, m);
        if (v && (!found || *v > row.baseline_mean)) {
          found = true;
          row.baseline_mean = *v;
          row.best_baseline = method;
        }
      }
      if (!found) continue;
      row.upper_mean = mean_of("upper_bound", 0.0, m);
      try {
        row.rir = rir(row.model_mean, row.baseline_mean);
      } catch (const Error&) {
      }
      if (row.upper_mean) {
        try {
          row.rgrr = rgrr(row.model_mean, row.baseline_mean, *row.upper_mean);
        } catch (const Error&) {
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Results file

namespace detail {

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline std::optional<double> number_or_null(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline Json summary_json(const Summary& s) { return Json{{"mean", s.mean}, {"std", s.std}, {"count", s.count}}; }

}  // namespace detail

inline Json to_json(const SweepReport& rep) {
  Json j;
  j["format"] = kSweepFormat;
  j["code_version"] = rep.code_version;
  j["config_hash"] = rep.config_hash;
  j["config"] = rep.config_text;
  j["methods"] = rep.methods;
  j["missing_rates"] = rep.missing_rates;
  j["seeds"] = rep.seeds;
  Json grid = Json::array();
  for (const auto& g : rep.grid) {
    Json cands = Json::array();
    for (const auto& c : g.candidates)
      cands.push_back(Json{{"lr", c.lr}, {"dev_macro_f1", detail::optional_number(c.dev_macro_f1)}});
    grid.push_back(Json{{"method", g.method}, {"chosen_lr", g.chosen_lr}, {"candidates", cands}});
  }
  j["grid"] = grid;
  Json runs = Json::array();
  for (const auto& r : rep.runs) {
    Json x{{"method", r.result.method}, {"missing_rate", r.result.missing_rate}, {"seed", r.result.seed}};
    if (r.failed) {
      x["failed"] = true;
      x["error"] = r.error;
    } else {
      x["macro_f1"] = r.result.macro_f1;
      x["auc_roc"] = r.result.auc_roc;
      x["imputation_rmse"] = detail::optional_number(r.result.imputation_rmse);
      x["tied_rmse"] = detail::optional_number(r.result.tied_rmse);
    }
    runs.push_back(std::move(x));
  }
  j["runs"] = runs;

  const auto cells = collect_cells(rep);
  Json aggs = Json::array();
  for (const auto& [key, cell] : cells) {
    Json a{{"method", key.method}, {"missing_rate", key.rate}, {"runs", cell.runs.size()},
           {"failures", cell.failures}, {"complete", cell.summary.has_value()}};
    if (cell.summary) {
      for (Metric m : {Metric::kMacroF1, Metric::kAucRoc, Metric::kRmse, Metric::kTiedRmse}) {
        const auto s = metric_of(*cell.summary, m);
        a[metric_name(m)] = s ? detail::summary_json(*s) : Json(nullptr);
      }
    }
    aggs.push_back(std::move(a));
  }
  j["aggregates"] = aggs;
  Json rel = Json::array();
  for (const auto& r : relative_rows(rep, cells)) {
    rel.push_back(Json{{"missing_rate", r.missing_rate},
                       {"metric", metric_name(r.metric)},
                       {"best_baseline", r.best_baseline},
                       {"best_baseline_mean", r.baseline_mean},
                       {"classifier_gain_mean", r.model_mean},
                       {"upper_bound_mean", detail::optional_number(r.upper_mean)},
                       {"rir", detail::optional_number(r.rir)},
                       {"rgrr", detail::optional_number(r.rgrr)}});
  }
  j["relative"] = rel;
  return j;
}

inline SweepReport sweep_from_json(const Json& j) {
  try {
    require(j.at("format").get<std::string>() == kSweepFormat, ErrorKind::kData, "not a sweep results file");
    SweepReport rep;
    rep.code_version = j.at("code_version").get<std::string>();
    rep.config_hash = j.at("config_hash").get<std::string>();
    rep.config_text = j.at("config").get<std::string>();
    rep.methods = j.at("methods").get<std::vector<std::string>>();
    rep.missing_rates = j.at("missing_rates").get<std::vector<double>>();
    rep.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& g : j.at("grid")) {
      GridChoice ch;
      ch.method = g.at("method").get<std::string>();
      ch.chosen_lr = g.at("chosen_lr").get<double>();
      for (const auto& c : g.at("candidates"))
        ch.candidates.push_back({c.at("lr").get<double>(), detail::number_or_null(c.at("dev_macro_f1"))});
      rep.grid.push_back(std::move(ch));
    }
    for (const auto& x : j.at("runs")) {
      RunRecord r;
      r.result.method = x.at("method").get<std::string>();
      r.result.missing_rate = x.at("missing_rate").get<double>();
      r.result.seed = x.at("seed").get<std::uint64_t>();
      if (x.value("failed", false)) {
        r.failed = true;
        r.error = x.at("error").get<std::string>();
      } else {
        r.result.macro_f1 = x.at("macro_f1").get<double>();
        r.result.auc_roc = x.at("auc_roc").get<double>();
        r.result.imputation_rmse = detail::number_or_null(x.at("imputation_rmse"));
        r.result.tied_rmse = detail::number_or_null(x.at("tied_rmse"));
      }
      rep.runs.push_back(std::move(r));
    }
    return rep;
  } catch (const Json::exception& e) {
    fail(ErrorKind::kData, std::string("malformed sweep results: ") + e.what());
  }
}

inline SweepReport load_sweep(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kData, "cannot open " + path);
  try {
    return sweep_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::kData, path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Human-readable table

namespace detail {

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

inline std::string percent_label(double rate) {
  const double p = rate * 100.0;
  return fixed(p, std::abs(p - std::round(p)) < 1e-9 ? 0 : 1) + "%";
}

}  // namespace detail

/// Markdown tables with "mean ± std" cells. Classification metrics are shown
/// in percent; the best mean per column is bold; incomplete cells read "n/a"
/// and point to a footnote listing the failures.
inline std::string render_markdown(const SweepReport& rep) {
  using detail::fixed;
  const auto cells = collect_cells(rep);
  const auto rel = relative_rows(rep, cells);
  std::vector<std::string> footnotes;
  std::map<CellKey, std::size_t> footnote_of;
  auto footnote = [&](const CellKey& key, const Cell& cell) {
    const auto it = footnote_of.find(key);
    if (it != footnote_of.end()) return it->second;
    std::string text = key.method + (key.method == "upper_bound" ? "" : " at " + detail::percent_label(key.rate)) +
                       ": " + std::to_string(cell.failures) + " of " + std::to_string(rep.seeds.size()) +
                       " runs failed";
    for (const RunRecord* r : cell.runs)
      if (r->failed) text += "; seed " + std::to_string(r->result.seed) + ": " + r->error;
    footnotes.push_back(text);
    return footnote_of[key] = footnotes.size();
  };

  std::ostringstream o;
  o << "# Sweep results\n\n";
  o << "Config hash `" << rep.config_hash << "`, " << rep.code_version << ", seeds";
  for (std::size_t i = 0; i < rep.seeds.size(); ++i) o << (i ? ", " : " ") << rep.seeds[i];
  o << ".\n";
  if (!rep.grid.empty()) {
    o << "\nLearning rates chosen on the dev split:";
    for (std::size_t i = 0; i < rep.grid.size(); ++i)
      o << (i ? ", " : " ") << rep.grid[i].method << " " << format_exact(rep.grid[i].chosen_lr);
    o << ".\n";
  }

  std::vector<std::string> masked;
  for (const auto& m : rep.methods)
    if (m != "upper_bound") masked.push_back(m);
  const bool with_upper = std::find(rep.methods.begin(), rep.methods.end(), "upper_bound") != rep.methods.end();

  struct Section {
    Metric metric;
    const char* title;
    bool percent;
    bool higher_better;
  };
  for (const Section& sec : {Section{Metric::kMacroF1, "Macro F1 (%)", true, true},
                             Section{Metric::kAucRoc, "AUC-ROC (%)", true, true},
                             Section{Metric::kRmse, "Imputation RMSE (scaled units)", false, false},
                             Section{Metric::kTiedRmse, "Imputation RMSE on linearly tied features", false, false}}) {
    const bool imputation = !sec.percent;
    bool any = false;
    for (const auto& [key, cell] : cells)
      if (cell.summary && metric_of(*cell.summary, sec.metric)) any = true;
    if (!any && imputation) continue;
    auto render = [&](const Summary& s) {
      return sec.percent ? fixed(s.mean * 100.0, 1) + " ± " + fixed(s.std * 100.0, 1)
                         : fixed(s.mean, 4) + " ± " + fixed(s.std, 4);
    };
    o << "\n## " << sec.title << "\n\n| Method |";
    for (double r : rep.missing_rates) o << " " << detail::percent_label(r) << " |";
    o << "\n|---|";
    for (std::size_t i = 0; i < rep.missing_rates.size(); ++i) o << "---|";
    o << "\n";

    std::map<double, double> best;
    for (double r : rep.missing_rates)
      for (const auto& m : masked) {
        const auto it = cells.find({m, r});
        if (it == cells.end() || !it->second.summary) continue;
        const auto s = metric_of(*it->second.summary, sec.metric);
        if (!s) continue;
        const auto b = best.find(r);
        if (b == best.end() || (sec.higher_better ? s->mean > b->second : s->mean < b->second)) best[r] = s->mean;
      }
    for (const auto& m : masked) {
      o << "| " << m << " |";
      for (double r : rep.missing_rates) {
        const auto it = cells.find({m, r});
        if (it == cells.end()) {
          o << " n/a |";
          continue;
        }
        if (!it->second.summary) {
          o << " n/a [" << footnote(it->first, it->second) << "] |";
          continue;
        }
        const auto s = metric_of(*it->second.summary, sec.metric);
        if (!s) {
          o << " - |";
          continue;
        }
        const bool bold = best.count(r) && best[r] == s->mean;
        o << " " << (bold ? "**" : "") << render(*s) << (bold ? "**" : "") << " |";
      }
      o << "\n";
    }
    if (!imputation) {
      for (const char* label : {"RIR (%)", "RGRR (%)"}) {
        const bool is_rir = label[1] == 'I';
        bool has_row = false;
        std::string line = std::string("| ") + label + " |";
        for (double r : rep.missing_rates) {
          const auto it = std::find_if(rel.begin(), rel.end(), [&](const RelativeRow& x) {
            return x.missing_rate == r && x.metric == sec.metric;
          });
          const std::optional<double> v = it == rel.end() ? std::nullopt : (is_rir ? it->rir : it->rgrr);
          if (v) has_row = true;
          line += v ? " " + fixed(*v * 100.0, 2) + " |" : " n/a |";
        }
        if (has_row) o << line << "\n";
      }
      if (with_upper) {
        const auto it = cells.find({"upper_bound", 0.0});
        o << "\nUpper bound (complete data, every rate): ";
        if (it == cells.end() || !it->second.summary) {
          o << "n/a";
          if (it != cells.end()) o << " [" << footnote(it->first, it->second) << "]";
        } else {
          o << render(*metric_of(*it->second.summary, sec.metric));
        }
        o << "\n";
      }
    }
  }
  if (!footnotes.empty()) {
    o << "\n## Failures\n\n";
    for (std::size_t i = 0; i < footnotes.size(); ++i) o << "[" << i + 1 << "] " << footnotes[i] << "\n";
  }
  return o.str();
}

/// Writes `<prefix>.json` and `<prefix>.md`.
inline void write_report(const SweepReport& rep, const std::string& prefix) {
  {
    std::ofstream out(prefix + ".json");
    require(out.good(), ErrorKind::kData, "cannot write " + prefix + ".json");
    out << to_json(rep).dump(2) << "\n";
  }
  std::ofstream out(prefix + ".md");
  require(out.good(), ErrorKind::kData, "cannot write " + prefix + ".md");
  out << render_markdown(rep);
}

// ---------------------------------------------------------------------------
// Density export

inline constexpr std::size_t kMinDensityBins = 10;
inline constexpr std::size_t kMaxDensityBins = 10000;

struct DensityBin {
  double left = 0.0;
  double right = 0.0;
  double mass = 0.0;
};

struct ImputedMarker {
  std::string method;
  std::string sample;
  double value = 0.0;
};

struct ClassDensity {
  int label = 0;
  std::size_t count = 0;
  std::vector<DensityBin> bins;
};

struct DensityData {
  std::string feature;
  std::vector<ClassDensity> classes;
  std::vector<ImputedMarker> markers;
};

/// Linear-interpolation quantile of sorted values.
inline double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Freedman-Diaconis histogram with at least kMinDensityBins bins. Masses
/// are bin frequencies; equal values collapse into one bin of mass 1.
inline std::vector<DensityBin> histogram_density(std::vector<double> values) {
  require(!values.empty(), ErrorKind::kData, "histogram of no values");
  std::sort(values.begin(), values.end());
  const double lo = values.front(), hi = values.back();
  if (lo == hi) return {{lo, hi, 1.0}};
  const double iqr = quantile_sorted(values, 0.75) - quantile_sorted(values, 0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(values.size()));
  std::size_t bins = kMinDensityBins;
  if (width > 0.0) bins = std::max(bins, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
  bins = std::min(bins, kMaxDensityBins);
  const double step = (hi - lo) / static_cast<double>(bins);
  std::vector<DensityBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].left = lo + step * static_cast<double>(b);
    out[b].right = b + 1 == bins ? hi : lo + step * static_cast<double>(b + 1);
  }
  const double unit = 1.0 / static_cast<double>(values.size());
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / step);
    out[std::min(b, bins - 1)].mass += unit;
  }
  return out;
}

inline DensityData export_density(const MaskedDataset& data, const std::string& feature,
                                  const std::vector<ImputedMarker>& imputations) {
  const auto it = std::find(data.names.begin(), data.names.end(), feature);
  require(it != data.names.end(), ErrorKind::kUsage, "unknown feature '" + feature + "'");
  const auto col = static_cast<std::size_t>(it - data.names.begin());
  DensityData out;
  out.feature = feature;
  for (int label : {0, 1}) {
    std::vector<double> values;
    for (std::size_t i = 0; i < data.rows(); ++i)
      if (data.labels[i] == label && data.mask(i, col) == 1.0) values.push_back(data.values(i, col));
    require(values.size() >= 2, ErrorKind::kData,
            "feature '" + feature + "' needs at least 2 observed values in class " + std::to_string(label));
    out.classes.push_back({label, values.size(), histogram_density(values)});
  }
  out.markers = imputations;
  return out;
}

/// CSV with `density` rows (class, bin edges, mass) followed by `marker` rows
/// (method, sample, value).
inline void write_density_csv(const DensityData& d, std::ostream& out) {
  out << "kind,feature,class,method,sample,left,right,value\n";
  for (const auto& c : d.classes)
    for (const auto& b : c.bins)
      out << "density," << d.feature << ',' << c.label << ",,," << format_exact(b.left) << ','
          << format_exact(b.right) << ',' << format_exact(b.mass) << '\n';
  for (const auto& m : d.markers)
    out << "marker," << d.feature << ",," << m.method << ',' << m.sample << ",,," << format_exact(m.value) << '\n';
}

/// Reads `method,sample,value` rows (header required).
inline std::vector<ImputedMarker> read_markers_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kData, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::vector<ImputedMarker> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line, ',');
    ImputedMarker m;
    require(f.size() == 3 && parse_double(f[2], m.value), ErrorKind::kData,
            path + ": row " + std::to_string(row) + " must be method,sample,value");
    m.method = f[0];
    m.sample = f[1];
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training histories

inline void write_history_csv(const std::vector<CgEpochRecord>& h, std::ostream& out) {
  out << "epoch,loss_g_adv,loss_r,loss_c,loss_d,train_macro_f1\n";
  for (const auto& r : h)
    out << r.epoch << ',' << format_exact(r.loss_g_adv) << ',' << format_exact(r.loss_r) << ','
        << format_exact(r.loss_c) << ',' << format_exact(r.loss_d) << ',' << format_exact(r.train_macro_f1) << '\n';
}

inline void write_history_csv(const std::vector<GainEpochRecord>& h, std::ostream& out) {
  out << "epoch,loss_g_adv,loss_r,loss_d\n";
  for (const auto& r : h)
    out << r.epoch << ',' << format_exact(r.loss_g_adv) << ',' << format_exact(r.loss_r) << ','
        << format_exact(r.loss_d) << '\n';
}

}  // namespace cgain
