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
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgain/error.hpp"
#include "cgain/keyvalue.hpp"
#include "cgain/matrix.hpp"
#include "cgain/rng.hpp"

namespace cgain {

enum class FeatureKind { kNumeric, kBinary };

inline const char* to_string(FeatureKind k) { return k == FeatureKind::kBinary ? "binary" : "numeric"; }

inline FeatureKind parse_feature_kind(const std::string& s) {
  if (s == "binary") return FeatureKind::kBinary;
  if (s == "numeric") return FeatureKind::kNumeric;
  fail(ErrorKind::kConfig, "unknown feature kind '" + s + "'");
}

/// Partially observed data with an explicit mask (1 = observed) and binary
/// labels. Cells with mask 0 hold a placeholder that is never read.
struct MaskedDataset {
  Matrix values;
  Matrix mask;
  std::vector<int> labels;
  std::vector<FeatureKind> kinds;
  std::vector<std::string> names;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }

  void validate() const {
    require_same_shape(values, mask, "dataset values vs mask");
    require(labels.size() == rows(), ErrorKind::kData, "label count does not match row count");
    require(kinds.size() == cols() && names.size() == cols(), ErrorKind::kData,
            "feature kinds/names do not match column count");
    for (double m : mask.flat()) require(m == 0.0 || m == 1.0, ErrorKind::kData, "mask entries must be 0 or 1");
    for (int y : labels) require(y == 0 || y == 1, ErrorKind::kData, "labels must be 0 or 1");
    for (std::size_t i = 0; i < rows(); ++i) {
      const auto r = mask.row(i);
      require(std::any_of(r.begin(), r.end(), [](double m) { return m == 1.0; }), ErrorKind::kData,
              "row " + std::to_string(i) + " has no observed entries");
    }
  }

  double missing_fraction() const {
    if (mask.empty()) return 0.0;
    double observed = 0.0;
    for (double m : mask.flat()) observed += m;
    return 1.0 - observed / static_cast<double>(mask.size());
  }
};

inline std::vector<std::string> default_feature_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

inline MaskedDataset subset_rows(const MaskedDataset& data, std::span<const std::size_t> rows) {
  MaskedDataset out;
  out.values = select_rows(data.values, rows);
  out.mask = select_rows(data.mask, rows);
  for (std::size_t r : rows) out.labels.push_back(data.labels[r]);
  out.kinds = data.kinds;
  out.names = data.names;
  return out;
}

/// Copy with every label replaced by 0; what inference paths receive.
inline MaskedDataset without_labels(MaskedDataset data) {
  std::fill(data.labels.begin(), data.labels.end(), 0);
  return data;
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticSpec {
  std::size_t n_samples = 2000;
  std::size_t n_features = 10;
  double class1_fraction = 0.5;
  /// Class-1 mean offset, in units of the per-feature standard deviation.
  double mean_shift = 2.0;
  /// Pairwise correlation of the latent features.
  double correlation = 0.0;
  /// Probability that an observed label is flipped.
  double label_noise = 0.0;
  /// The last `tied_features` columns are exact copies `2 * x_k` of columns
  /// k = 0, 1, ... and carry no independent signal.
  std::size_t tied_features = 0;

  void validate() const {
    require(n_samples >= 2, ErrorKind::kConfig, "n_samples must be >= 2");
    require(n_features >= 1, ErrorKind::kConfig, "n_features must be >= 1");
    require(class1_fraction > 0.0 && class1_fraction < 1.0, ErrorKind::kConfig, "class1_fraction must be in (0,1)");
    require(correlation >= 0.0 && correlation < 1.0, ErrorKind::kConfig, "correlation must be in [0,1)");
    require(label_noise >= 0.0 && label_noise < 1.0, ErrorKind::kConfig, "label_noise must be in [0,1)");
    require(std::isfinite(mean_shift), ErrorKind::kConfig, "mean_shift must be finite");
    require(tied_features < n_features && tied_features <= n_features - tied_features, ErrorKind::kConfig,
            "tied_features must leave at least as many source columns");
  }
};

/// Two-class Gaussian data: x = sqrt(rho) * common + sqrt(1 - rho) * noise_j
/// + shift * y_true, fully observed. Bit-deterministic per (spec, seed).
inline MaskedDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::size_t d = spec.n_features;
  const std::size_t free_cols = d - spec.tied_features;
  MaskedDataset data;
  data.values = Matrix(spec.n_samples, d);
  data.mask = Matrix(spec.n_samples, d, 1.0);
  data.labels.resize(spec.n_samples);
  data.kinds.assign(d, FeatureKind::kNumeric);
  data.names = default_feature_names(d);
  Rng rng(derive_seed(seed, {0x5917}));
  const double shared = std::sqrt(spec.correlation);
  const double own = std::sqrt(1.0 - spec.correlation);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    const int y = rng.bernoulli(spec.class1_fraction) ? 1 : 0;
    const double common = rng.normal();
    for (std::size_t j = 0; j < free_cols; ++j) {
      data.values(i, j) = shared * common + own * rng.normal() + spec.mean_shift * y;
    }
    for (std::size_t t = 0; t < spec.tied_features; ++t) data.values(i, free_cols + t) = 2.0 * data.values(i, t);
    const bool flip = spec.label_noise > 0.0 && rng.bernoulli(spec.label_noise);
    data.labels[i] = flip ? 1 - y : y;
  }
  return data;
}

// ---------------------------------------------------------------------------
// MCAR masking

inline constexpr int kMcarRowRetries = 100;

/// Drops each currently observed entry in `columns` with probability `rate`,
/// independently. Rows that would lose every observed entry are redrawn up to
/// `kMcarRowRetries` times; after that one uniformly chosen entry stays
/// observed. Each row uses its own seed stream.
inline MaskedDataset apply_mcar(const MaskedDataset& data, double rate, std::span<const std::size_t> columns,
                                std::uint64_t seed) {
  require(rate >= 0.0 && rate <= 1.0, ErrorKind::kConfig, "missing rate must lie in [0,1]");
  require(!columns.empty(), ErrorKind::kConfig, "feature subset must be non-empty");
  std::vector<char> in_subset(data.cols(), 0);
  for (std::size_t c : columns) {
    require(c < data.cols(), ErrorKind::kConfig, "feature subset column out of range");
    in_subset[c] = 1;
  }
  MaskedDataset out = data;
  if (rate == 0.0) return out;

  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto row = data.mask.row(i);
    std::vector<std::size_t> candidates;
    bool observed_outside = false;
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] != 1.0) continue;
      if (in_subset[j]) {
        candidates.push_back(j);
      } else {
        observed_outside = true;
      }
    }
    if (candidates.empty()) continue;
    if (rate >= 1.0 && !observed_outside) {
      fail(ErrorKind::kConfig, "missing rate 1 would leave row " + std::to_string(i) + " fully missing");
    }
    Rng rng(derive_seed(seed, {0x3CA2, i}));
    std::vector<char> drop(candidates.size(), 0);
    bool ok = false;
    for (int attempt = 0; attempt < kMcarRowRetries && !ok; ++attempt) {
      std::size_t dropped = 0;
      for (auto& dflag : drop) {
        dflag = rng.bernoulli(rate) ? 1 : 0;
        dropped += static_cast<std::size_t>(dflag);
      }
      ok = observed_outside || dropped < candidates.size();
    }
    if (!ok) drop[static_cast<std::size_t>(rng.below(candidates.size()))] = 0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      if (drop[k]) out.mask(i, candidates[k]) = 0.0;
    }
  }
  return out;
}

inline std::vector<std::size_t> all_columns(std::size_t d) {
  std::vector<std::size_t> cols(d);
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  return cols;
}

// ---------------------------------------------------------------------------
// Min-max scaling

/// Per-feature min/max over observed entries. Binary features pass through.
struct ScalerState {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<FeatureKind> kinds;

  std::size_t cols() const noexcept { return kinds.size(); }
  friend bool operator==(const ScalerState&, const ScalerState&) = default;
};

inline ScalerState fit_scaler(const MaskedDataset& data) {
  ScalerState s;
  s.kinds = data.kinds;
  s.min.assign(data.cols(), 0.0);
  s.max.assign(data.cols(), 0.0);
  for (std::size_t j = 0; j < data.cols(); ++j) {
    bool seen = false;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (data.mask(i, j) != 1.0) continue;
      const double v = data.values(i, j);
      if (!seen) {
        s.min[j] = s.max[j] = v;
        seen = true;
      } else {
        s.min[j] = std::min(s.min[j], v);
        s.max[j] = std::max(s.max[j], v);
      }
    }
  }
  return s;
}

inline void check_scaler(const MaskedDataset& data, const ScalerState& s) {
  require(s.cols() == data.cols() && s.min.size() == data.cols() && s.max.size() == data.cols(), ErrorKind::kState,
          "scaler fitted on " + std::to_string(s.cols()) + " features, data has " + std::to_string(data.cols()));
  for (std::size_t j = 0; j < data.cols(); ++j)
    require(s.kinds[j] == data.kinds[j], ErrorKind::kState, "scaler feature kinds do not match data");
}

/// Observed numeric cells map to (x - min) / (max - min), or 0 for a constant
/// feature. Missing cells become 0.
inline MaskedDataset scale(const MaskedDataset& data, const ScalerState& s) {
  check_scaler(data, s);
  MaskedDataset out = data;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (data.mask(i, j) != 1.0) {
        out.values(i, j) = 0.0;
      } else if (s.kinds[j] == FeatureKind::kNumeric) {
        const double range = s.max[j] - s.min[j];
        out.values(i, j) = range > 0.0 ? (data.values(i, j) - s.min[j]) / range : 0.0;
      }
    }
  }
  return out;
}

/// Scales every cell of a completed matrix (no mask involved).
inline Matrix scale_values(const Matrix& values, const ScalerState& s) {
  require(values.cols() == s.cols(), ErrorKind::kState, "scaler width mismatch");
  Matrix out = values;
  for (std::size_t i = 0; i < values.rows(); ++i)
    for (std::size_t j = 0; j < values.cols(); ++j) {
      if (s.kinds[j] != FeatureKind::kNumeric) continue;
      const double range = s.max[j] - s.min[j];
      out(i, j) = range > 0.0 ? (values(i, j) - s.min[j]) / range : 0.0;
    }
  return out;
}

inline Matrix unscale_values(const Matrix& values, const ScalerState& s) {
  require(values.cols() == s.cols(), ErrorKind::kState, "scaler width mismatch");
  Matrix out = values;
  for (std::size_t i = 0; i < values.rows(); ++i)
    for (std::size_t j = 0; j < values.cols(); ++j) {
      if (s.kinds[j] != FeatureKind::kNumeric) continue;
      out(i, j) = values(i, j) * (s.max[j] - s.min[j]) + s.min[j];
    }
  return out;
}

inline MaskedDataset unscale(const MaskedDataset& data, const ScalerState& s) {
  check_scaler(data, s);
  MaskedDataset out = data;
  out.values = unscale_values(data.values, s);
  return out;
}

// ---------------------------------------------------------------------------
// CSV ingestion and dataset persistence

/// Reads a header-first CSV. Cells equal to `na_token` are missing. Columns
/// whose observed values are all 0 or 1 are binary unless overridden. Rows
/// with no observed feature are dropped and counted in `dropped_rows`.
inline MaskedDataset load_csv(const std::string& path, const std::string& na_token, const std::string& label_column,
                              const std::map<std::string, FeatureKind>& kind_overrides = {},
                              std::size_t* dropped_rows = nullptr) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIngestion, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorKind::kIngestion, path + ": missing header row");
  const auto header = split_fields(line, ',');
  std::size_t label_idx = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == label_column) label_idx = c;
  require(label_idx < header.size(), ErrorKind::kIngestion, path + ": no label column '" + label_column + "'");

  MaskedDataset data;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_idx) data.names.push_back(header[c]);
  const std::size_t d = data.names.size();
  require(d >= 1, ErrorKind::kIngestion, path + ": no feature columns");

  std::vector<double> values, mask;
  std::size_t row = 0;
  std::size_t dropped = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line, ',');
    require(fields.size() == header.size(), ErrorKind::kIngestion,
            path + ": row " + std::to_string(row) + " has " + std::to_string(fields.size()) + " fields, expected " +
                std::to_string(header.size()));
    const std::string& lab = fields[label_idx];
    double y = 0.0;
    require(lab != na_token && !lab.empty(), ErrorKind::kIngestion,
            path + ": row " + std::to_string(row) + " is missing its label");
    require(parse_double(lab, y) && (y == 0.0 || y == 1.0), ErrorKind::kIngestion,
            path + ": row " + std::to_string(row) + " label '" + lab + "' is not 0/1");
    std::vector<double> rv, rm;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == label_idx) continue;
      if (fields[c] == na_token) {
        rv.push_back(0.0);
        rm.push_back(0.0);
        continue;
      }
      double v = 0.0;
      require(parse_double(fields[c], v) && std::isfinite(v), ErrorKind::kIngestion,
              path + ": row " + std::to_string(row) + ", column '" + header[c] + "': cannot parse '" + fields[c] + "'");
      rv.push_back(v);
      rm.push_back(1.0);
    }
    if (std::none_of(rm.begin(), rm.end(), [](double m) { return m == 1.0; })) {
      ++dropped;
      continue;
    }
    values.insert(values.end(), rv.begin(), rv.end());
    mask.insert(mask.end(), rm.begin(), rm.end());
    data.labels.push_back(static_cast<int>(y));
  }
  const std::size_t n = data.labels.size();
  data.values = Matrix(n, d, std::move(values));
  data.mask = Matrix(n, d, std::move(mask));
  data.kinds.assign(d, FeatureKind::kNumeric);
  for (std::size_t j = 0; j < d; ++j) {
    bool binary = true;
    for (std::size_t i = 0; i < n && binary; ++i)
      if (data.mask(i, j) == 1.0 && data.values(i, j) != 0.0 && data.values(i, j) != 1.0) binary = false;
    data.kinds[j] = binary ? FeatureKind::kBinary : FeatureKind::kNumeric;
    if (const auto it = kind_overrides.find(data.names[j]); it != kind_overrides.end()) data.kinds[j] = it->second;
  }
  if (dropped_rows) *dropped_rows = dropped;
  return data;
}

/// Writes `<prefix>.values.csv`, `<prefix>.mask.csv` and `<prefix>.meta`.
/// Values are written exactly (shortest round-trip text); the mask file is
/// authoritative for missingness.
inline void save_dataset(const MaskedDataset& data, const std::string& prefix,
                         const std::optional<ScalerState>& scaler = std::nullopt) {
  data.validate();
  {
    std::ofstream out(prefix + ".values.csv");
    require(out.good(), ErrorKind::kData, "cannot write " + prefix + ".values.csv");
    for (const auto& n : data.names) out << n << ',';
    out << "label\n";
    for (std::size_t i = 0; i < data.rows(); ++i) {
      for (std::size_t j = 0; j < data.cols(); ++j) out << format_exact(data.values(i, j)) << ',';
      out << data.labels[i] << '\n';
    }
  }
  {
    std::ofstream out(prefix + ".mask.csv");
    require(out.good(), ErrorKind::kData, "cannot write " + prefix + ".mask.csv");
    for (std::size_t j = 0; j < data.cols(); ++j) out << (j ? "," : "") << data.names[j];
    out << '\n';
    for (std::size_t i = 0; i < data.rows(); ++i) {
      for (std::size_t j = 0; j < data.cols(); ++j) out << (j ? "," : "") << (data.mask(i, j) == 1.0 ? '1' : '0');
      out << '\n';
    }
  }
  std::ofstream meta(prefix + ".meta");
  require(meta.good(), ErrorKind::kData, "cannot write " + prefix + ".meta");
  meta << "# cgain dataset metadata\n";
  meta << "format = cgain-dataset-1\n";
  meta << "rows = " << data.rows() << "\n";
  meta << "cols = " << data.cols() << "\n";
  for (std::size_t j = 0; j < data.cols(); ++j) {
    meta << "feature." << j << ".name = " << data.names[j] << "\n";
    meta << "feature." << j << ".kind = " << to_string(data.kinds[j]) << "\n";
  }
  meta << "scaler.fitted = " << (scaler ? 1 : 0) << "\n";
  if (scaler) {
    for (std::size_t j = 0; j < scaler->cols(); ++j) {
      meta << "scaler." << j << ".min = " << format_hex(scaler->min[j]) << "\n";
      meta << "scaler." << j << ".max = " << format_hex(scaler->max[j]) << "\n";
    }
  }
}

struct LoadedDataset {
  MaskedDataset data;
  std::optional<ScalerState> scaler;
};

inline LoadedDataset load_dataset(const std::string& prefix) {
  std::ifstream meta_in(prefix + ".meta");
  require(meta_in.good(), ErrorKind::kData, "cannot open " + prefix + ".meta");
  const KeyValues meta = KeyValues::parse(meta_in, prefix + ".meta");
  require(meta.get_or("format", "") == "cgain-dataset-1", ErrorKind::kData, prefix + ".meta: unknown format");
  const std::size_t n = meta.get_count("rows");
  const std::size_t d = meta.get_count("cols");
  LoadedDataset out;
  MaskedDataset& data = out.data;
  for (std::size_t j = 0; j < d; ++j) {
    data.names.push_back(meta.get("feature." + std::to_string(j) + ".name"));
    data.kinds.push_back(parse_feature_kind(meta.get("feature." + std::to_string(j) + ".kind")));
  }
  auto read_rows = [&](const std::string& path, std::size_t width, auto&& on_row) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::kData, "cannot open " + path);
    std::string line;
    std::getline(in, line);
    std::size_t row = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto f = split_fields(line, ',');
      require(f.size() == width, ErrorKind::kData, path + ": row " + std::to_string(row + 1) + " has wrong width");
      require(row < n, ErrorKind::kData, path + ": more rows than declared");
      on_row(row, f);
      ++row;
    }
    require(row == n, ErrorKind::kData, path + ": fewer rows than declared");
  };
  data.values = Matrix(n, d);
  data.mask = Matrix(n, d);
  data.labels.assign(n, 0);
  read_rows(prefix + ".values.csv", d + 1, [&](std::size_t i, const std::vector<std::string>& f) {
    for (std::size_t j = 0; j < d; ++j)
      require(parse_double(f[j], data.values(i, j)), ErrorKind::kData,
              prefix + ".values.csv: row " + std::to_string(i + 1) + ", column " + data.names[j] + ": bad number");
    double y = 0.0;
    require(parse_double(f[d], y) && (y == 0.0 || y == 1.0), ErrorKind::kData, "bad label");
    data.labels[i] = static_cast<int>(y);
  });
  read_rows(prefix + ".mask.csv", d, [&](std::size_t i, const std::vector<std::string>& f) {
    for (std::size_t j = 0; j < d; ++j) {
      require(f[j] == "0" || f[j] == "1", ErrorKind::kData, prefix + ".mask.csv: entries must be 0 or 1");
      data.mask(i, j) = f[j] == "1" ? 1.0 : 0.0;
    }
  });
  data.validate();
  if (meta.get_or("scaler.fitted", "0") == "1") {
    ScalerState s;
    s.kinds = data.kinds;
    for (std::size_t j = 0; j < d; ++j) {
      s.min.push_back(meta.get_double("scaler." + std::to_string(j) + ".min"));
      s.max.push_back(meta.get_double("scaler." + std::to_string(j) + ".max"));
    }
    out.scaler = std::move(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitPlan {
  /// Ratio mode when k_folds == 0.
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
  std::size_t k_folds = 0;
  bool stratified = true;
  std::uint64_t seed = 0;

  bool uses_folds() const noexcept { return k_folds != 0; }

  void validate() const {
    if (uses_folds()) {
      require(k_folds >= 2, ErrorKind::kConfig, "k_folds must be >= 2");
      return;
    }
    require(train > 0.0 && dev >= 0.0 && test > 0.0, ErrorKind::kConfig, "split fractions must be positive");
    require(std::abs(train + dev + test - 1.0) < 1e-9, ErrorKind::kConfig, "split fractions must sum to 1");
  }
};

struct SplitParts {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;  // empty in k-fold mode
  std::vector<std::size_t> test;
};

/// Ratio mode yields one part; k-fold mode yields one part per fold with the
/// fold as test set. Stratified splits process each class separately.
inline std::vector<SplitParts> split(std::span<const int> labels, const SplitPlan& plan) {
  plan.validate();
  const std::size_t n = labels.size();
  Rng rng(derive_seed(plan.seed, {0x5B17}));
  std::vector<std::vector<std::size_t>> groups;
  if (plan.stratified) {
    groups.resize(2);
    for (std::size_t i = 0; i < n; ++i) groups[labels[i] == 1 ? 1 : 0].push_back(i);
  } else {
    groups.emplace_back(n);
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }
  for (auto& g : groups) rng.shuffle(g);

  std::vector<SplitParts> parts;
  if (plan.uses_folds()) {
    if (plan.stratified) {
      for (const auto& g : groups)
        require(g.empty() || g.size() >= plan.k_folds, ErrorKind::kConfig,
                "fold count exceeds the samples available in a class");
    }
    require(n >= plan.k_folds, ErrorKind::kConfig, "fold count exceeds sample count");
    std::vector<std::size_t> fold_of(n);
    std::size_t cursor = 0;
    for (const auto& g : groups)
      for (std::size_t idx : g) fold_of[idx] = cursor++ % plan.k_folds;
    parts.resize(plan.k_folds);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t f = 0; f < plan.k_folds; ++f) (fold_of[i] == f ? parts[f].test : parts[f].train).push_back(i);
    return parts;
  }

  SplitParts p;
  for (const auto& g : groups) {
    const auto m = static_cast<double>(g.size());
    const auto n_test = static_cast<std::size_t>(std::llround(m * plan.test));
    const auto n_dev = static_cast<std::size_t>(std::llround(m * plan.dev));
    require(n_test + n_dev <= g.size(), ErrorKind::kConfig, "split leaves no training rows");
    p.test.insert(p.test.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(n_test));
    p.dev.insert(p.dev.end(), g.begin() + static_cast<std::ptrdiff_t>(n_test),
                 g.begin() + static_cast<std::ptrdiff_t>(n_test + n_dev));
    p.train.insert(p.train.end(), g.begin() + static_cast<std::ptrdiff_t>(n_test + n_dev), g.end());
  }
  std::sort(p.train.begin(), p.train.end());
  std::sort(p.dev.begin(), p.dev.end());
  std::sort(p.test.begin(), p.test.end());
  parts.push_back(std::move(p));
  return parts;
}

inline std::vector<SplitParts> split(const MaskedDataset& data, const SplitPlan& plan) {
  return split(std::span<const int>(data.labels), plan);
}

// ---------------------------------------------------------------------------
// Missingness report

struct FeatureMissingRate {
  std::string name;
  std::size_t column = 0;
  double rate = 0.0;
};

struct MissingReport {
  std::vector<FeatureMissingRate> features;  // highest rate first
  double overall = 0.0;
};

inline MissingReport missing_report(const MaskedDataset& data) {
  MissingReport r;
  for (std::size_t j = 0; j < data.cols(); ++j) {
    double observed = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) observed += data.mask(i, j);
    const double rate = data.rows() ? 1.0 - observed / static_cast<double>(data.rows()) : 0.0;
    r.features.push_back({data.names[j], j, rate});
  }
  std::stable_sort(r.features.begin(), r.features.end(),
                   [](const auto& a, const auto& b) { return a.rate > b.rate; });
  r.overall = data.missing_fraction();
  return r;
}

}  // namespace cgain
