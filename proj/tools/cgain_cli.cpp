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


// Command-line front end: data generation, masking, imputation, training,
// prediction, sweeps, reports and density export.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cgain/classifier_gain.hpp"
#include "cgain/config.hpp"
#include "cgain/data.hpp"
#include "cgain/error.hpp"
#include "cgain/gain.hpp"
#include "cgain/harness.hpp"
#include "cgain/impute.hpp"
#include "cgain/serialize.hpp"

namespace {

using namespace cgain;

ExperimentConfig config_or_default(const std::string& path) {
  if (path.empty()) {
    ExperimentConfig c;
    apply_preset(c.preset, c);
    return c;
  }
  return load_experiment(path);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::kData, "cannot write " + path);
  return out;
}

/// Completed values, original scale, with the label column when present.
void write_completed_csv(const MaskedDataset& data, const Matrix& values, const std::vector<double>* y_hat,
                         const std::string& path) {
  std::ofstream out = open_out(path);
  for (const auto& n : data.names) out << n << ',';
  out << (y_hat ? "y_hat" : "label") << '\n';
  for (std::size_t i = 0; i < values.rows(); ++i) {
    for (std::size_t j = 0; j < values.cols(); ++j) out << format_exact(values(i, j)) << ',';
    if (y_hat) {
      out << format_exact((*y_hat)[i]) << '\n';
    } else {
      out << data.labels[i] << '\n';
    }
  }
}

void print_missing_report(const MaskedDataset& data) {
  const MissingReport r = missing_report(data);
  std::printf("overall missing rate %.4f\n", r.overall);
  for (const auto& f : r.features) std::printf("  %-20s %.4f\n", f.name.c_str(), f.rate);
}

struct GenerateArgs {
  std::string out;
  std::string csv;
  std::string na_token = "NA";
  std::string label = "label";
  std::vector<std::string> binary;
  SyntheticSpec spec;
  std::uint64_t seed = 1;
};

int cmd_generate(const GenerateArgs& a) {
  MaskedDataset data;
  if (!a.csv.empty()) {
    std::map<std::string, FeatureKind> overrides;
    for (const auto& b : a.binary) overrides[b] = FeatureKind::kBinary;
    std::size_t dropped = 0;
    data = load_csv(a.csv, a.na_token, a.label, overrides, &dropped);
    if (dropped != 0) std::fprintf(stderr, "dropped %zu fully missing rows\n", dropped);
  } else {
    data = generate_synthetic(a.spec, a.seed);
  }
  save_dataset(data, a.out);
  std::printf("wrote %zu rows x %zu features to %s\n", data.rows(), data.cols(), a.out.c_str());
  return 0;
}

struct MaskArgs {
  std::string in, out;
  double rate = 0.2;
  std::uint64_t seed = 1;
  std::vector<std::string> features;
};

int cmd_mask(const MaskArgs& a) {
  const LoadedDataset in = load_dataset(a.in);
  const MaskedDataset masked = apply_mcar(in.data, a.rate, resolve_columns(in.data, a.features), a.seed);
  save_dataset(masked, a.out, in.scaler);
  print_missing_report(masked);
  return 0;
}

struct ImputeArgs {
  std::string in, out, method = "simple", config, history;
  std::uint64_t seed = 1;
  std::size_t draws = 1;
};

int cmd_impute(const ImputeArgs& a) {
  const ExperimentConfig c = config_or_default(a.config);
  const LoadedDataset in = load_dataset(a.in);
  const ScalerState scaler = fit_scaler(in.data);
  const MaskedDataset scaled = scale(in.data, scaler);
  Matrix completed;
  if (a.method == "simple") {
    completed = simple_impute(scaled);
  } else if (a.method == "mice") {
    ChainedImputerDiagnostics diag;
    completed = mice_impute(scaled, c.mice, &diag);
    std::fprintf(stderr, "mice: %zu rounds, %s\n", diag.rounds, diag.converged ? "converged" : "not converged");
    for (const auto& line : diag.log) std::fprintf(stderr, "  %s\n", line.c_str());
  } else if (a.method == "gain") {
    const GainModel g = train_gain(scaled, c.gain, a.seed);
    if (!a.history.empty()) {
      std::ofstream h = open_out(a.history);
      write_history_csv(g.history, h);
    }
    completed = impute_full(g.generator, scaled, a.seed, a.draws);
  } else {
    fail(ErrorKind::kUsage, "method must be simple, mice or gain");
  }
  write_completed_csv(in.data, unscale_values(completed, scaler), nullptr, a.out);
  return 0;
}

struct TrainArgs {
  std::string in, out, config, history;
  std::uint64_t seed = 1;
};

int cmd_train(const TrainArgs& a) {
  const ExperimentConfig c = config_or_default(a.config);
  const LoadedDataset in = load_dataset(a.in);
  const ScalerState scaler = fit_scaler(in.data);
  TrainedTriple t = train_classifier_gain(scale(in.data, scaler), c.classifier_gain, a.seed);
  t.scaler = scaler;
  t.config_hash = config_hash(c);
  save_triple(t, a.out);
  if (!a.history.empty()) {
    std::ofstream h = open_out(a.history);
    write_history_csv(t.history, h);
  }
  if (!t.history.empty())
    std::printf("trained %zu epochs, final train macro-F1 %.4f\n", t.history.size(), t.history.back().train_macro_f1);
  return 0;
}

struct PredictArgs {
  std::string model, in, out;
  std::uint64_t seed = 1;
  std::size_t draws = 1;
};

int cmd_predict(const PredictArgs& a) {
  const TrainedTriple t = load_triple(a.model);
  const LoadedDataset in = load_dataset(a.in);
  require(t.scaler.cols() == in.data.cols(), ErrorKind::kData, "model and data feature counts differ");
  const Prediction p = predict(t, without_labels(scale(in.data, t.scaler)), a.seed, a.draws);
  write_completed_csv(in.data, unscale_values(p.x_hat, t.scaler), &p.y_hat, a.out);
  return 0;
}

struct SweepArgs {
  std::string config, out;
  std::size_t workers = 0;
};

int cmd_sweep(const SweepArgs& a) {
  const ExperimentConfig c = load_experiment(a.config);
  const SweepReport rep = run_sweep(c, a.workers);
  write_report(rep, a.out);
  std::size_t failed = 0;
  for (const auto& r : rep.runs) failed += r.failed ? 1 : 0;
  std::printf("%zu runs, %zu failed; wrote %s.json and %s.md\n", rep.runs.size(), failed, a.out.c_str(),
              a.out.c_str());
  return 0;
}

struct ReportArgs {
  std::string in, out;
};

int cmd_report(const ReportArgs& a) {
  write_report(load_sweep(a.in), a.out);
  return 0;
}

struct DensityArgs {
  std::string in, feature, imputations, out;
};

int cmd_density(const DensityArgs& a) {
  const LoadedDataset in = load_dataset(a.in);
  std::vector<ImputedMarker> markers;
  if (!a.imputations.empty()) markers = read_markers_csv(a.imputations);
  const DensityData d = export_density(in.data, a.feature, markers);
  std::ofstream out = open_out(a.out);
  write_density_csv(d, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classifier-GAIN imputation and classification toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate-data", "Synthesize a dataset or ingest a CSV file");
  g->add_option("--out", gen.out, "Output dataset prefix")->required();
  g->add_option("--csv", gen.csv, "Ingest this CSV instead of synthesizing");
  g->add_option("--na", gen.na_token, "Missing-value token in the CSV");
  g->add_option("--label", gen.label, "Label column name in the CSV");
  g->add_option("--binary", gen.binary, "Columns to treat as binary")->delimiter(',');
  g->add_option("--n-samples", gen.spec.n_samples);
  g->add_option("--n-features", gen.spec.n_features);
  g->add_option("--class1-fraction", gen.spec.class1_fraction);
  g->add_option("--mean-shift", gen.spec.mean_shift);
  g->add_option("--correlation", gen.spec.correlation);
  g->add_option("--label-noise", gen.spec.label_noise);
  g->add_option("--tied-features", gen.spec.tied_features);
  g->add_option("--seed", gen.seed);

  MaskArgs mask;
  auto* m = app.add_subcommand("mask", "Remove observed entries completely at random");
  m->add_option("--in", mask.in, "Input dataset prefix")->required();
  m->add_option("--out", mask.out, "Output dataset prefix")->required();
  m->add_option("--rate", mask.rate, "Missing rate")->required();
  m->add_option("--seed", mask.seed);
  m->add_option("--features", mask.features, "Restrict masking to these features")->delimiter(',');

  ImputeArgs imp;
  auto* i = app.add_subcommand("impute", "Complete a dataset with simple, mice or gain");
  i->add_option("--in", imp.in, "Input dataset prefix")->required();
  i->add_option("--out", imp.out, "Completed CSV")->required();
  i->add_option("--method", imp.method)->check(CLI::IsMember({"simple", "mice", "gain"}));
  i->add_option("--config", imp.config, "Key-value config file");
  i->add_option("--seed", imp.seed);
  i->add_option("--draws", imp.draws, "Generator draws averaged per row");
  i->add_option("--history", imp.history, "Per-epoch loss CSV (gain)");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a Classifier-GAIN model");
  t->add_option("--in", tr.in, "Training dataset prefix")->required();
  t->add_option("--out", tr.out, "Model file")->required();
  t->add_option("--config", tr.config, "Key-value config file");
  t->add_option("--seed", tr.seed);
  t->add_option("--history", tr.history, "Per-epoch loss CSV");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Impute and classify with a trained model");
  p->add_option("--model", pr.model)->required();
  p->add_option("--in", pr.in, "Dataset prefix")->required();
  p->add_option("--out", pr.out, "Output CSV of completed values and y_hat")->required();
  p->add_option("--seed", pr.seed);
  p->add_option("--draws", pr.draws);

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Run a missing-rate sweep");
  s->add_option("--config", sw.config)->required();
  s->add_option("--out", sw.out, "Report prefix (.json and .md)")->required();
  s->add_option("--workers", sw.workers, std::string("Parallel runs; default from ") + kWorkersEnv);

  ReportArgs rp;
  auto* r = app.add_subcommand("report", "Re-render a sweep results file");
  r->add_option("--in", rp.in, "Sweep results JSON")->required();
  r->add_option("--out", rp.out, "Report prefix")->required();

  DensityArgs de;
  auto* d = app.add_subcommand("export-density", "Per-class histogram density of one feature");
  d->add_option("--in", de.in, "Dataset prefix")->required();
  d->add_option("--feature", de.feature)->required();
  d->add_option("--imputations", de.imputations, "CSV of method,sample,value markers");
  d->add_option("--out", de.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*m) return cmd_mask(mask);
    if (*i) return cmd_impute(imp);
    if (*t) return cmd_train(tr);
    if (*p) return cmd_predict(pr);
    if (*s) return cmd_sweep(sw);
    if (*r) return cmd_report(rp);
    if (*d) return cmd_density(de);
  } catch (const cgain::Error& e) {
    std::fprintf(stderr, "cgain: %s\n", e.what());
    return cgain::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cgain: %s\n", e.what());
    return 1;
  }
  return 0;
}
