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

#include <cstdint>
#include <span>
#include <vector>

#include "cgain/error.hpp"
#include "cgain/gain.hpp"
#include "cgain/matrix.hpp"
#include "cgain/metrics.hpp"
#include "cgain/nn.hpp"
#include "cgain/optimizer.hpp"

namespace cgain {

/// Stand-alone classifier used after an imputer and for the upper bound.
struct ClassifierHyper {
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double lr = 1e-3;
  double weight_decay = 5e-4;
  NetShape shape{32, 16, 0.1};

  void validate() const {
    require(batch_size >= 1, ErrorKind::kConfig, "batch_size must be >= 1");
    require(lr > 0.0, ErrorKind::kConfig, "learning rate must be positive");
    require(weight_decay >= 0.0, ErrorKind::kConfig, "weight decay must be >= 0");
  }
};

struct ClassifierEpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
};

struct ClassifierModel {
  Network net;
  std::vector<ClassifierEpochRecord> history;
};

inline std::vector<double> predict_proba(const Network& net, const Matrix& x) {
  require(net.spec().input_dim == x.cols() && net.spec().output_dim == 1, ErrorKind::kShape,
          "classifier width does not match data");
  const Matrix out = net.forward(x, Mode::kInference);
  return {out.flat().begin(), out.flat().end()};
}

/// Minibatch BCE training on a completed matrix.
inline ClassifierModel train_classifier(const Matrix& x, std::span<const int> labels, const ClassifierHyper& hyper,
                                        std::uint64_t seed) {
  hyper.validate();
  require(x.rows() == labels.size(), ErrorKind::kData, "label count does not match row count");
  require(x.all_finite(), ErrorKind::kNumeric, "non-finite classifier input");
  ClassifierModel model;
  model.net = Network(hyper.shape.spec(x.cols(), 1), derive_seed(seed, {stream::kInit, kClassifierRole}));
  Adam adam({hyper.lr, 0.9, 0.999, 1e-8, hyper.weight_decay});
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    ClassifierEpochRecord rec{epoch + 1, 0.0};
    const auto batches = epoch_batches(x.rows(), hyper.batch_size, seed, epoch);
    for (std::size_t bi = 0; bi < batches.size(); ++bi, ++step) {
      const auto& rows = batches[bi];
      std::vector<int> y;
      for (std::size_t r : rows) y.push_back(labels[r]);
      ForwardCache cache;
      const Matrix p = model.net.forward(select_rows(x, rows), Mode::kTrain,
                                         derive_seed(seed, {stream::kDropoutClassifier, step, 0}), &cache);
      const LossValue loss = classification_loss(y, p);
      require_finite_loss(loss.value, "classifier loss", epoch + 1, bi + 1);
      const Backprop back = model.net.backward(cache, loss.grad);
      adam.step(model.net.mutable_parameters(), back.params);
      model.net.update_running_stats(cache);
      rec.loss += loss.value;
    }
    rec.loss /= static_cast<double>(batches.size());
    model.history.push_back(rec);
  }
  return model;
}

}  // namespace cgain
