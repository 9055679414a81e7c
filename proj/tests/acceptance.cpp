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


// Acceptance suite: one PASS/FAIL line per criterion; exits non-zero if any
// criterion fails.

#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "cgain/harness.hpp"
#include "cgain/serialize.hpp"
#include "checks.hpp"

namespace {

using namespace cgain;
using testing::bitwise_equal;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome gradient_check() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) worst = std::max(worst, testing::combined_objective_grad_error(seed));
  return {worst < 1e-4, fmt("20 seeds, eps 1e-5, max relative error %.3g", worst)};
}

Outcome gain_equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const double gap = testing::pinned_equivalence_gap(seed, 100);
    if (gap < 0.0) return {false, "trajectory shorter than 100 steps"};
    worst = std::max(worst, gap);
  }
  return {worst < 1e-10, fmt("3 seeds x 100 generator steps, max parameter gap %.3g", worst)};
}

Outcome metric_oracles() {
  std::size_t bad = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto inst = testing::random_scored_instance(seed);
    if (std::abs(auc_roc(inst.labels, inst.scores) - testing::auc_oracle(inst.labels, inst.scores)) > 1e-12) ++bad;
    if (std::abs(macro_f1(inst.labels, inst.scores) - testing::macro_f1_oracle(inst.labels, inst.scores)) > 1e-12)
      ++bad;
  }
  const double example = auc_roc(std::vector{0, 0, 1, 1}, std::vector{0.1, 0.4, 0.35, 0.8});
  return {bad == 0 && example == 0.75, fmt("1000 instances, %zu mismatches, example AUC %.4f", bad, example)};
}

bool observed_preserved(const MaskedDataset& d, const Matrix& out) {
  for (std::size_t k = 0; k < out.size(); ++k)
    if (d.mask[k] == 1.0 && std::bit_cast<std::uint64_t>(out[k]) != std::bit_cast<std::uint64_t>(d.values[k]))
      return false;
  return true;
}

Outcome identities() {
  const std::size_t rows = 1000, cols = 100;
  const Matrix m = testing::random_mask(rows, cols, 0.3, 1);
  const Matrix b = sample_hint_draw(rows, cols, 0.9, 2);
  const Matrix x = testing::random_matrix(rows, cols, 3, 0.0, 1.0);
  const Matrix g = testing::random_matrix(rows, cols, 4, 0.0, 1.0);
  const Matrix h = hint_from(m, b);
  const Matrix mixed = mix_by_mask(m, x, g);
  std::size_t bad = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double want_h = b[k] == 1.0 ? m[k] : 0.5;
    const double want_x = m[k] == 1.0 ? x[k] : g[k];
    if (std::bit_cast<std::uint64_t>(h[k]) != std::bit_cast<std::uint64_t>(want_h)) ++bad;
    if (std::bit_cast<std::uint64_t>(mixed[k]) != std::bit_cast<std::uint64_t>(want_x)) ++bad;
  }
  const MaskedDataset d = testing::random_dataset(200, 6, 0.3, 5);
  CgHyper ch;
  ch.gain.epochs = 2;
  const TrainedTriple t = train_classifier_gain(d, ch, 6);
  GainHyper gh;
  gh.epochs = 2;
  const GainModel gm = train_gain(d, gh, 7);
  const bool kept = observed_preserved(d, simple_impute(d)) && observed_preserved(d, mice_impute(d, {})) &&
                    observed_preserved(d, impute_full(gm.generator, d, 8, 3)) &&
                    observed_preserved(d, predict(t, d, 9, 3).x_hat);
  return {bad == 0 && kept, fmt("%zu entries, %zu identity violations, imputers preserve observed cells: %s",
                                m.size(), bad, kept ? "yes" : "no")};
}

Outcome relative_rates() {
  const double a = rir(82.9, 68.3) * 100.0, b = rgrr(82.9, 68.3, 84.8) * 100.0;
  return {std::abs(a - 21.38) <= 0.01 && std::abs(b - 88.48) <= 0.01, fmt("RIR %.4f%%, RGRR %.4f%%", a, b)};
}

ExperimentConfig directional_config() {
  ExperimentConfig c = parse_experiment(KeyValues::parse_string(
      "preset = ucsf\n"
      "[data]\nn_samples = 2000\nn_features = 10\nmean_shift = 2\ncorrelation = 0.8\ntied_features = 3\n"
      "[sweep]\nmissing_rates = 0.3\nseeds = 1, 2, 3, 4, 5\n"
      "methods = simple, mice, gain, classifier_gain, upper_bound\n"));
  return c;
}

Outcome directional() {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig c = directional_config();
  const SweepReport rep = run_sweep(c, 0);
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  const auto cells = collect_cells(rep);
  auto cell = [&](const std::string& m, double rate) -> const GroupSummary* {
    const auto it = cells.find({m, rate});
    return it == cells.end() || !it->second.summary ? nullptr : &*it->second.summary;
  };
  const GroupSummary *ub = cell("upper_bound", 0.0), *cg = cell("classifier_gain", 0.3), *gain = cell("gain", 0.3),
                     *simple = cell("simple", 0.3), *mice = cell("mice", 0.3);
  if (!ub || !cg || !gain || !simple || !mice) return {false, "incomplete sweep"};
  const double f_ub = ub->macro_f1.mean * 100, f_cg = cg->macro_f1.mean * 100, f_gain = gain->macro_f1.mean * 100;
  const double r_simple = simple->tied_rmse->mean, r_mice = mice->tied_rmse->mean, r_cg = cg->tied_rmse->mean;
  const bool ub_ok = f_ub >= f_cg;
  const bool gap_ok = f_cg >= f_gain + 1.0;
  const bool mice_ok = r_mice <= 0.8 * r_simple;
  const bool cg_rmse_ok = r_cg <= 0.8 * r_simple;
  const bool time_ok = minutes < 15.0;
  return {ub_ok && gap_ok && mice_ok && cg_rmse_ok && time_ok,
          fmt("macro-F1 UB %.2f CG %.2f GAIN %.2f simple %.2f mice %.2f [UB>=CG %s, CG>=GAIN+1 %s]; tied RMSE "
              "simple %.4f mice %.4f CG %.4f [mice -20%% %s, CG -20%% %s]; %.1f min",
              f_ub, f_cg, f_gain, simple->macro_f1.mean * 100, mice->macro_f1.mean * 100, ub_ok ? "ok" : "no",
              gap_ok ? "ok" : "no", r_simple, r_mice, r_cg, mice_ok ? "ok" : "no", cg_rmse_ok ? "ok" : "no",
              minutes)};
}

Outcome determinism() {
  const ExperimentConfig c = parse_experiment(KeyValues::parse_string(
      "[data]\nn_samples = 200\nn_features = 4\ntied_features = 1\n"
      "[sweep]\nmissing_rates = 0.2, 0.4\nseeds = 1, 2\n"
      "[gain]\nepochs = 2\n[classifier_gain]\nepochs = 2\n[classifier]\nepochs = 2\n"));
  const SweepReport a = run_sweep(c, 1), b = run_sweep(c, 3);
  const bool reports = to_json(a).dump(2) == to_json(b).dump(2) && render_markdown(a) == render_markdown(b);
  const MaskedDataset d = testing::random_dataset(64, 4, 0.3, 2);
  CgHyper h;
  h.gain.epochs = 2;
  TrainedTriple t = train_classifier_gain(d, h, 3);
  t.scaler = fit_scaler(d);
  t.config_hash = "deadbeef";
  const std::string text = serialize_triple(t);
  std::istringstream in(text);
  const TrainedTriple back = read_triple(in);
  const bool triple = serialize_triple(back) == text && back.generator == t.generator &&
                      back.classifier == t.classifier && back.discriminator == t.discriminator &&
                      back.scaler == t.scaler;
  return {reports && triple, fmt("reports byte-identical across worker counts: %s; triple round-trip bit-exact: %s",
                                 reports ? "yes" : "no", triple ? "yes" : "no")};
}

Outcome freeze() {
  const testing::FreezeReport r = testing::watch_freeze(5, 2);
  return {r.violations == 0 && r.generator_steps > 0 && r.discriminator_steps > 0,
          fmt("%zu generator/classifier steps, %zu discriminator steps, %zu violations", r.generator_steps,
              r.discriminator_steps, r.violations)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"combined objective gradient check", gradient_check},
      {"pinned classifier reduces to GAIN", gain_equivalence},
      {"metric oracles", metric_oracles},
      {"hint and mixing identities", identities},
      {"RIR and RGRR", relative_rates},
      {"directional end-to-end", directional},
      {"determinism", determinism},
      {"freeze contract", freeze},
  };
  int failures = 0;
  for (std::size_t i = 0; i < std::size(criteria); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %zu: %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
