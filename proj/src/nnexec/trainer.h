// Copyright 2026 The HierNAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HIERNAS_NNEXEC_TRAINER_H_
#define HIERNAS_NNEXEC_TRAINER_H_

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "nnexec/dataset.h"
#include "nnexec/model.h"

namespace hiernas::nn {

struct TrainerSettings {
  int steps = 300;
  int batch = 16;
  // Piecewise-constant learning rate: (first step, rate), sorted by step.
  std::vector<std::pair<int, double>> schedule{{0, 0.05}};
  double momentum = 0.9;
  double weight_decay = 3e-4;
  std::uint64_t seed = 0;  // batch order
};

// Throws std::invalid_argument on an empty/unsorted schedule or non-positive rates.
void check_settings(const TrainerSettings& s);
double learning_rate_at(const TrainerSettings& s, int step);

struct TrainResult {
  double val_accuracy = 0.0;
  double train_accuracy = 0.0;
  double last_loss = 0.0;
  int steps = 0;
};

// Momentum SGD (v = mu * v + g; w -= lr * v) on shuffled minibatches.
// NumericFailure propagates.
TrainResult sgd_train(Model& model, const Dataset& data, const TrainerSettings& s);

// Fraction of rows classified correctly in eval mode.
double evaluate_accuracy(Model& model, const Tensor& x, std::span<const int> y,
                         int batch = 64);

}  // namespace hiernas::nn

#endif  // HIERNAS_NNEXEC_TRAINER_H_
