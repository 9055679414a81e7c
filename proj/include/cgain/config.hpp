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


// Experiment configuration: key-value files, dataset presets and the canonical
// resolved form that reports echo and hash.

#pragma once

#include <algorithm>
#include <cerrno>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "cgain/classifier.hpp"
#include "cgain/classifier_gain.hpp"
#include "cgain/data.hpp"
#include "cgain/error.hpp"
#include "cgain/gain.hpp"
#include "cgain/impute.hpp"
#include "cgain/keyvalue.hpp"

namespace cgain {

inline constexpr const char* kWorkersEnv = "CGAIN_WORKERS";
inline constexpr const char* kCodeVersion = "cgain 0.1.0";

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m = {"simple", "mice", "gain", "classifier_gain", "upper_bound"};
  return m;
}

inline bool is_baseline(const std::string& method) {
  return method == "simple" || method == "mice" || method == "gain";
}

struct DataSourceConfig {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SyntheticSpec synthetic;
  std::string path;
  std::string na_token = "NA";
  std::string label_column = "label";
  std::map<std::string, FeatureKind> kind_overrides;
};

struct ExperimentConfig {
  std::string preset = "ucsf";
  DataSourceConfig data;
  SplitPlan split;
  std::vector<double> missing_rates{0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
  std::vector<std::string> methods{"simple", "mice", "gain", "classifier_gain", "upper_bound"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  /// Feature names eligible for simulated masking; empty means all.
  std::vector<std::string> mask_features;
  std::size_t n_draws = 1;
  /// 0 defers to the environment, then to a single worker.
  std::size_t workers = 0;
  ChainedImputerConfig mice;
  GainHyper gain;
  CgHyper classifier_gain;
  ClassifierHyper classifier;
  /// Learning-rate candidates for the dev-split search; empty disables it.
  std::vector<double> grid_lrs;

  bool has_method(const std::string& m) const {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  }

  void validate() const {
    require(!missing_rates.empty(), ErrorKind::kConfig, "missing_rates must not be empty");
    require(!methods.empty(), ErrorKind::kConfig, "methods must not be empty");
    require(!seeds.empty(), ErrorKind::kConfig, "seeds must not be empty");
    for (double r : missing_rates)
      require(r >= 0.0 && r < 1.0, ErrorKind::kConfig, "missing rates must lie in [0,1)");
    std::set<std::string> seen;
    for (const auto& m : methods) {
      require(std::find(known_methods().begin(), known_methods().end(), m) != known_methods().end(),
              ErrorKind::kConfig, "unknown method '" + m + "'");
      require(seen.insert(m).second, ErrorKind::kConfig, "method '" + m + "' listed twice");
    }
    require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(), ErrorKind::kConfig,
            "seeds must be distinct");
    require(n_draws >= 1, ErrorKind::kConfig, "n_draws must be >= 1");
    for (double lr : grid_lrs) require(lr > 0.0, ErrorKind::kConfig, "grid learning rates must be positive");
    split.validate();
    if (data.kind == DataSourceConfig::Kind::kSynthetic) data.synthetic.validate();
    mice.validate();
    gain.validate();
    classifier_gain.validate();
    classifier.validate();
  }
};

// ---------------------------------------------------------------------------
// Presets

/// Hyper-parameter presets for the two clinical cohorts. Learning rates
/// stay at 1e-3, the middle of the searched range.
inline void apply_preset(const std::string& name, ExperimentConfig& c) {
  c.preset = name;
  c.mice = ChainedImputerConfig{};
  c.mice.max_rounds = 100;
  c.mice.tolerance = 1e-3;
  GainHyper& g = c.gain;
  CgHyper& cg = c.classifier_gain;
  ClassifierHyper& cl = c.classifier;
  g = GainHyper{};
  cg = CgHyper{};
  cl = ClassifierHyper{};
  if (name == "ucsf") {
    g.epochs = 50;
    g.batch_size = 16;
    g.p_hint = 0.9;
    g.alpha = 5.0;
    cg.gain.epochs = 50;
    cg.gain.batch_size = 128;
    cg.gain.p_hint = 0.9;
    cg.gain.alpha = 5.0;
    cg.beta = 1.0;
    cg.classifier = {32, 16, 0.1};
    cl.epochs = 30;
    cl.batch_size = 16;
    cl.shape = {32, 16, 0.1};
  } else if (name == "sepsis") {
    g.epochs = 20;
    g.batch_size = 128;
    g.p_hint = 0.9;
    g.alpha = 1.0;
    cg.gain.epochs = 50;
    cg.gain.batch_size = 128;
    cg.gain.p_hint = 0.5;
    cg.gain.alpha = 20.0;
    cg.beta = 1.0;
    cg.classifier = {128, 64, 0.1};
    cl.epochs = 30;
    cl.batch_size = 128;
    cl.shape = {128, 64, 0.1};
  } else {
    fail(ErrorKind::kConfig, "unknown preset '" + name + "' (expected ucsf or sepsis)");
  }
  for (GainHyper* h : {&g, &cg.gain}) {
    h->generator = {64, 32, 0.1};
    h->discriminator = {64, 32, 0.1};
    h->weight_decay_g = h->weight_decay_d = 5e-4;
  }
  cg.weight_decay_c = 5e-4;
  cl.weight_decay = 5e-4;
}

// ---------------------------------------------------------------------------
// Reading

/// Tracks which keys were consumed so leftovers can be reported as typos.
class ConfigReader {
 public:
  explicit ConfigReader(const KeyValues& kv) : kv_(kv) {}

  bool has(const std::string& key) const { return kv_.has(key); }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!kv_.has(key)) return;
    used_.insert(key);
    if constexpr (std::is_same_v<T, std::size_t>) {
      out = kv_.get_count(key);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      out = parse_seed(key, kv_.get(key));
    } else if constexpr (std::is_same_v<T, double>) {
      out = kv_.get_double(key);
    } else if constexpr (std::is_same_v<T, bool>) {
      out = parse_flag(key, kv_.get(key));
    } else if constexpr (std::is_same_v<T, std::string>) {
      out = kv_.get(key);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      out = kv_.get_list(key);
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      out = kv_.get_words(key);
    } else if constexpr (std::is_same_v<T, std::vector<std::uint64_t>>) {
      out.clear();
      for (const auto& w : kv_.get_words(key)) out.push_back(parse_seed(key, w));
    } else {
      static_assert(sizeof(T) == 0, "unsupported config value type");
    }
  }

  void mark(const std::string& key) { used_.insert(key); }

  void finish() const {
    for (const auto& k : kv_.keys())
      require(used_.count(k) != 0, ErrorKind::kConfig, "unknown config key '" + k + "'");
  }

  static std::uint64_t parse_seed(const std::string& key, const std::string& text) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    require(!text.empty() && text.front() != '-' && end && *end == '\0' && errno == 0, ErrorKind::kConfig,
            "key '" + key + "' needs an unsigned integer, got '" + text + "'");
    return static_cast<std::uint64_t>(v);
  }

  static bool parse_flag(const std::string& key, const std::string& text) {
    if (text == "1" || text == "true" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "no") return false;
    fail(ErrorKind::kConfig, "key '" + key + "' needs true/false, got '" + text + "'");
  }

 private:
  const KeyValues& kv_;
  std::set<std::string> used_;
};

namespace detail {

inline std::string prefixed(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

inline void read_shape(ConfigReader& r, const std::string& prefix, NetShape& shape) {
  r.read(prefixed(prefix, "hidden1"), shape.hidden1);
  r.read(prefixed(prefix, "hidden2"), shape.hidden2);
  r.read(prefixed(prefix, "dropout"), shape.dropout);
}

}  // namespace detail

/// Plain keys `hidden1`, `hidden2`, `dropout` set both networks; the
/// `generator.` and `discriminator.` prefixed forms override one of them.
inline void read_gain_hyper(ConfigReader& r, const std::string& section, GainHyper& h) {
  using detail::prefixed;
  r.read(prefixed(section, "epochs"), h.epochs);
  r.read(prefixed(section, "batch_size"), h.batch_size);
  r.read(prefixed(section, "lr_g"), h.lr_g);
  r.read(prefixed(section, "lr_d"), h.lr_d);
  r.read(prefixed(section, "weight_decay_g"), h.weight_decay_g);
  r.read(prefixed(section, "weight_decay_d"), h.weight_decay_d);
  r.read(prefixed(section, "p_hint"), h.p_hint);
  r.read(prefixed(section, "alpha"), h.alpha);
  NetShape shared = h.generator;
  const bool any_shared = r.has(prefixed(section, "hidden1")) || r.has(prefixed(section, "hidden2")) ||
                          r.has(prefixed(section, "dropout"));
  detail::read_shape(r, section, shared);
  if (any_shared) h.generator = h.discriminator = shared;
  detail::read_shape(r, prefixed(section, "generator"), h.generator);
  detail::read_shape(r, prefixed(section, "discriminator"), h.discriminator);
}

inline void read_cg_hyper(ConfigReader& r, const std::string& section, CgHyper& h) {
  using detail::prefixed;
  read_gain_hyper(r, section, h.gain);
  r.read(prefixed(section, "lr_c"), h.lr_c);
  r.read(prefixed(section, "weight_decay_c"), h.weight_decay_c);
  r.read(prefixed(section, "beta"), h.beta);
  r.read(prefixed(section, "k_steps"), h.k_steps);
  detail::read_shape(r, prefixed(section, "classifier"), h.classifier);
}

/// The stand-alone classifier uses the classifier-side key names.
inline void read_classifier_hyper(ConfigReader& r, const std::string& section, ClassifierHyper& h) {
  using detail::prefixed;
  r.read(prefixed(section, "epochs"), h.epochs);
  r.read(prefixed(section, "batch_size"), h.batch_size);
  r.read(prefixed(section, "lr_c"), h.lr);
  r.read(prefixed(section, "weight_decay_c"), h.weight_decay);
  detail::read_shape(r, section, h.shape);
}

inline ExperimentConfig parse_experiment(const KeyValues& kv) {
  ExperimentConfig c;
  ConfigReader r(kv);
  std::string preset = "ucsf";
  r.read("preset", preset);
  apply_preset(preset, c);

  std::string source = "synthetic";
  r.read("data.source", source);
  if (source == "synthetic") {
    c.data.kind = DataSourceConfig::Kind::kSynthetic;
  } else if (source == "csv") {
    c.data.kind = DataSourceConfig::Kind::kCsv;
  } else {
    fail(ErrorKind::kConfig, "data.source must be synthetic or csv");
  }
  SyntheticSpec& s = c.data.synthetic;
  r.read("data.n_samples", s.n_samples);
  r.read("data.n_features", s.n_features);
  r.read("data.class1_fraction", s.class1_fraction);
  r.read("data.mean_shift", s.mean_shift);
  r.read("data.correlation", s.correlation);
  r.read("data.label_noise", s.label_noise);
  r.read("data.tied_features", s.tied_features);
  r.read("data.path", c.data.path);
  r.read("data.na_token", c.data.na_token);
  r.read("data.label_column", c.data.label_column);
  if (r.has("data.binary")) {
    std::vector<std::string> names;
    r.read("data.binary", names);
    for (const auto& n : names) c.data.kind_overrides[n] = FeatureKind::kBinary;
  }
  if (r.has("data.numeric")) {
    std::vector<std::string> names;
    r.read("data.numeric", names);
    for (const auto& n : names) c.data.kind_overrides[n] = FeatureKind::kNumeric;
  }
  if (c.data.kind == DataSourceConfig::Kind::kCsv)
    require(!c.data.path.empty(), ErrorKind::kConfig, "data.path is required for csv sources");

  r.read("split.train", c.split.train);
  r.read("split.dev", c.split.dev);
  r.read("split.test", c.split.test);
  r.read("split.k_folds", c.split.k_folds);
  r.read("split.stratified", c.split.stratified);
  r.read("split.seed", c.split.seed);

  r.read("sweep.missing_rates", c.missing_rates);
  r.read("sweep.methods", c.methods);
  r.read("sweep.seeds", c.seeds);
  r.read("sweep.mask_features", c.mask_features);
  r.read("sweep.n_draws", c.n_draws);
  r.read("sweep.workers", c.workers);

  r.read("mice.max_rounds", c.mice.max_rounds);
  r.read("mice.tolerance", c.mice.tolerance);
  r.read("mice.ridge", c.mice.ridge);

  read_gain_hyper(r, "gain", c.gain);
  read_cg_hyper(r, "classifier_gain", c.classifier_gain);
  read_classifier_hyper(r, "classifier", c.classifier);

  r.read("grid.lrs", c.grid_lrs);
  r.finish();
  c.validate();
  return c;
}

inline ExperimentConfig load_experiment(const std::string& path) { return parse_experiment(KeyValues::parse_file(path)); }

// ---------------------------------------------------------------------------
// Canonical form

namespace detail {

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, double>) {
      out += format_exact(xs[i]);
    } else if constexpr (std::is_same_v<T, std::string>) {
      out += xs[i];
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

inline void emit_shape(std::ostream& o, const std::string& p, const NetShape& s) {
  o << p << "hidden1 = " << s.hidden1 << "\n"
    << p << "hidden2 = " << s.hidden2 << "\n"
    << p << "dropout = " << format_exact(s.dropout) << "\n";
}

inline void emit_gain(std::ostream& o, const GainHyper& h) {
  o << "epochs = " << h.epochs << "\nbatch_size = " << h.batch_size << "\nlr_g = " << format_exact(h.lr_g)
    << "\nlr_d = " << format_exact(h.lr_d) << "\nweight_decay_g = " << format_exact(h.weight_decay_g)
    << "\nweight_decay_d = " << format_exact(h.weight_decay_d) << "\np_hint = " << format_exact(h.p_hint)
    << "\nalpha = " << format_exact(h.alpha) << "\n";
  emit_shape(o, "generator.", h.generator);
  emit_shape(o, "discriminator.", h.discriminator);
}

}  // namespace detail

/// Fully resolved configuration as parseable key-value text. Parsing it back
/// yields the same configuration.
inline std::string canonical_text(const ExperimentConfig& c) {
  using detail::join;
  std::ostringstream o;
  o << "preset = " << c.preset << "\n\n[data]\n";
  if (c.data.kind == DataSourceConfig::Kind::kSynthetic) {
    const SyntheticSpec& s = c.data.synthetic;
    o << "source = synthetic\nn_samples = " << s.n_samples << "\nn_features = " << s.n_features
      << "\nclass1_fraction = " << format_exact(s.class1_fraction) << "\nmean_shift = " << format_exact(s.mean_shift)
      << "\ncorrelation = " << format_exact(s.correlation) << "\nlabel_noise = " << format_exact(s.label_noise)
      << "\ntied_features = " << s.tied_features << "\n";
  } else {
    o << "source = csv\npath = " << c.data.path << "\nna_token = " << c.data.na_token
      << "\nlabel_column = " << c.data.label_column << "\n";
    std::vector<std::string> bin, num;
    for (const auto& [name, kind] : c.data.kind_overrides) (kind == FeatureKind::kBinary ? bin : num).push_back(name);
    if (!bin.empty()) o << "binary = " << join(bin) << "\n";
    if (!num.empty()) o << "numeric = " << join(num) << "\n";
  }
  o << "\n[split]\n";
  if (c.split.uses_folds()) {
    o << "k_folds = " << c.split.k_folds << "\n";
  } else {
    o << "train = " << format_exact(c.split.train) << "\ndev = " << format_exact(c.split.dev)
      << "\ntest = " << format_exact(c.split.test) << "\n";
  }
  o << "stratified = " << (c.split.stratified ? "true" : "false") << "\nseed = " << c.split.seed << "\n";
  o << "\n[sweep]\nmissing_rates = " << join(c.missing_rates) << "\nmethods = " << join(c.methods)
    << "\nseeds = " << join(c.seeds) << "\n";
  if (!c.mask_features.empty()) o << "mask_features = " << join(c.mask_features) << "\n";
  o << "n_draws = " << c.n_draws << "\n";
  o << "\n[mice]\nmax_rounds = " << c.mice.max_rounds << "\ntolerance = " << format_exact(c.mice.tolerance)
    << "\nridge = " << format_exact(c.mice.ridge) << "\n";
  o << "\n[gain]\n";
  detail::emit_gain(o, c.gain);
  o << "\n[classifier_gain]\n";
  detail::emit_gain(o, c.classifier_gain.gain);
  o << "lr_c = " << format_exact(c.classifier_gain.lr_c)
    << "\nweight_decay_c = " << format_exact(c.classifier_gain.weight_decay_c)
    << "\nbeta = " << format_exact(c.classifier_gain.beta) << "\nk_steps = " << c.classifier_gain.k_steps << "\n";
  detail::emit_shape(o, "classifier.", c.classifier_gain.classifier);
  o << "\n[classifier]\nepochs = " << c.classifier.epochs << "\nbatch_size = " << c.classifier.batch_size
    << "\nlr_c = " << format_exact(c.classifier.lr) << "\nweight_decay_c = " << format_exact(c.classifier.weight_decay)
    << "\n";
  detail::emit_shape(o, "", c.classifier.shape);
  if (!c.grid_lrs.empty()) o << "\n[grid]\nlrs = " << join(c.grid_lrs) << "\n";
  return o.str();
}

/// Worker count is an execution detail and does not enter the hash.
inline std::string config_hash(const ExperimentConfig& c) { return hex_digest(fnv1a(canonical_text(c))); }

/// Explicit setting, then the environment, then one worker.
inline std::size_t resolve_workers(std::size_t configured) {
  if (configured != 0) return configured;
  if (const char* env = std::getenv(kWorkersEnv)) {
    const std::uint64_t v = ConfigReader::parse_seed(kWorkersEnv, env);
    require(v >= 1, ErrorKind::kConfig, std::string(kWorkersEnv) + " must be >= 1");
    return static_cast<std::size_t>(v);
  }
  return 1;
}

}  // namespace cgain
