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

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cgain/classifier_gain.hpp"
#include "cgain/data.hpp"
#include "cgain/error.hpp"
#include "cgain/keyvalue.hpp"
#include "cgain/nn.hpp"

namespace cgain {

// Whitespace-separated text; every double is written in hex-float notation,
// so a write/read round trip reproduces each bit.

namespace detail {

inline void write_matrix(std::ostream& out, const char* tag, const Matrix& m) {
  out << tag << ' ' << m.rows() << ' ' << m.cols();
  for (double v : m.flat()) out << ' ' << format_hex(v);
  out << '\n';
}

inline void expect_token(std::istream& in, const std::string& want) {
  std::string got;
  in >> got;
  require(got == want, ErrorKind::kData, "model file: expected '" + want + "', found '" + got + "'");
}

inline double read_double(std::istream& in) {
  std::string tok;
  in >> tok;
  double v = 0.0;
  require(parse_double(tok, v), ErrorKind::kData, "model file: bad number '" + tok + "'");
  return v;
}

inline std::size_t read_count(std::istream& in) {
  long long v = -1;
  in >> v;
  require(static_cast<bool>(in) && v >= 0, ErrorKind::kData, "model file: bad count");
  return static_cast<std::size_t>(v);
}

inline Matrix read_matrix(std::istream& in, const std::string& tag) {
  expect_token(in, tag);
  const std::size_t r = read_count(in);
  const std::size_t c = read_count(in);
  Matrix m(r, c);
  for (double& v : m.flat()) v = read_double(in);
  return m;
}

}  // namespace detail

inline void write_network(std::ostream& out, const Network& net) {
  const NetworkSpec& s = net.spec();
  out << "network " << s.input_dim << ' ' << s.hidden1 << ' ' << s.hidden2 << ' ' << s.output_dim << ' '
      << format_hex(s.dropout_rate) << ' ' << (s.use_input_batchnorm ? 1 : 0) << ' ' << net.parameters().size()
      << '\n';
  for (const Matrix& p : net.parameters()) detail::write_matrix(out, "param", p);
  detail::write_matrix(out, "running_mean", net.running_mean());
  detail::write_matrix(out, "running_var", net.running_var());
}

inline Network read_network(std::istream& in) {
  detail::expect_token(in, "network");
  NetworkSpec s;
  s.input_dim = detail::read_count(in);
  s.hidden1 = detail::read_count(in);
  s.hidden2 = detail::read_count(in);
  s.output_dim = detail::read_count(in);
  s.dropout_rate = detail::read_double(in);
  s.use_input_batchnorm = detail::read_count(in) == 1;
  const std::size_t n_params = detail::read_count(in);
  Network net(s, 0);
  require(n_params == net.parameters().size(), ErrorKind::kData, "model file: parameter count mismatch");
  auto& params = net.mutable_parameters();
  for (auto& p : params) {
    Matrix m = detail::read_matrix(in, "param");
    require(m.same_shape(p), ErrorKind::kData, "model file: parameter shape mismatch");
    p = std::move(m);
  }
  Matrix mean = detail::read_matrix(in, "running_mean");
  Matrix var = detail::read_matrix(in, "running_var");
  net.set_running_stats(std::move(mean), std::move(var));
  return net;
}

inline void write_scaler(std::ostream& out, const ScalerState& s) {
  out << "scaler " << s.cols();
  for (std::size_t j = 0; j < s.cols(); ++j)
    out << ' ' << to_string(s.kinds[j]) << ' ' << format_hex(s.min[j]) << ' ' << format_hex(s.max[j]);
  out << '\n';
}

inline ScalerState read_scaler(std::istream& in) {
  detail::expect_token(in, "scaler");
  const std::size_t d = detail::read_count(in);
  ScalerState s;
  for (std::size_t j = 0; j < d; ++j) {
    std::string kind;
    in >> kind;
    s.kinds.push_back(parse_feature_kind(kind));
    s.min.push_back(detail::read_double(in));
    s.max.push_back(detail::read_double(in));
  }
  return s;
}

inline void write_triple(std::ostream& out, const TrainedTriple& t) {
  out << "cgain-triple 1\n";
  out << "config_hash " << (t.config_hash.empty() ? "-" : t.config_hash) << '\n';
  write_scaler(out, t.scaler);
  write_network(out, t.generator);
  write_network(out, t.classifier);
  write_network(out, t.discriminator);
  out << "history " << t.history.size() << '\n';
  for (const auto& h : t.history) {
    out << h.epoch << ' ' << format_hex(h.loss_g_adv) << ' ' << format_hex(h.loss_r) << ' ' << format_hex(h.loss_c)
        << ' ' << format_hex(h.loss_d) << ' ' << format_hex(h.train_macro_f1) << '\n';
  }
  out << "end\n";
}

inline TrainedTriple read_triple(std::istream& in) {
  detail::expect_token(in, "cgain-triple");
  require(detail::read_count(in) == 1, ErrorKind::kData, "unsupported model format version");
  TrainedTriple t;
  detail::expect_token(in, "config_hash");
  in >> t.config_hash;
  if (t.config_hash == "-") t.config_hash.clear();
  t.scaler = read_scaler(in);
  t.generator = read_network(in);
  t.classifier = read_network(in);
  t.discriminator = read_network(in);
  detail::expect_token(in, "history");
  const std::size_t n = detail::read_count(in);
  for (std::size_t i = 0; i < n; ++i) {
    CgEpochRecord r;
    r.epoch = detail::read_count(in);
    r.loss_g_adv = detail::read_double(in);
    r.loss_r = detail::read_double(in);
    r.loss_c = detail::read_double(in);
    r.loss_d = detail::read_double(in);
    r.train_macro_f1 = detail::read_double(in);
    t.history.push_back(r);
  }
  detail::expect_token(in, "end");
  const std::size_t d = t.classifier.spec().input_dim;
  require(t.generator.spec().input_dim == 2 * d && t.discriminator.spec().input_dim == 2 * d + 1 &&
              (t.scaler.cols() == 0 || t.scaler.cols() == d),
          ErrorKind::kData, "model file: inconsistent network widths");
  return t;
}

inline void save_triple(const TrainedTriple& t, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::kData, "cannot write " + path);
  write_triple(out, t);
}

inline TrainedTriple load_triple(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kData, "cannot open " + path);
  return read_triple(in);
}

inline std::string serialize_triple(const TrainedTriple& t) {
  std::ostringstream out;
  write_triple(out, t);
  return out.str();
}

}  // namespace cgain
