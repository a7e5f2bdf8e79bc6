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

#include "nnexec/trainer.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "core/rng.h"

namespace hiernas::nn {

void check_settings(const TrainerSettings& s) {
  if (s.steps < 0 || s.batch < 1) throw std::invalid_argument("trainer needs steps >= 0, batch >= 1");
  if (s.schedule.empty()) throw std::invalid_argument("learning-rate schedule is empty");
  for (std::size_t i = 0; i < s.schedule.size(); ++i) {
    if (!(s.schedule[i].second > 0.0)) throw std::invalid_argument("learning rates must be > 0");
    if (i > 0 && s.schedule[i].first <= s.schedule[i - 1].first) {
      throw std::invalid_argument("learning-rate schedule must be sorted by step");
    }
  }
  if (s.momentum < 0.0 || s.momentum >= 1.0) throw std::invalid_argument("momentum must be in [0, 1)");
  if (s.weight_decay < 0.0) throw std::invalid_argument("weight decay must be >= 0");
}

double learning_rate_at(const TrainerSettings& s, int step) {
  double rate = s.schedule.front().second;
  for (const auto& [from, r] : s.schedule) {
    if (step >= from) rate = r;
  }
  return rate;
}

TrainResult sgd_train(Model& model, const Dataset& data, const TrainerSettings& s) {
  check_settings(s);
  const auto rows = static_cast<std::size_t>(data.train_x.batch());
  const auto batch = std::min<std::size_t>(static_cast<std::size_t>(s.batch), rows);
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(s.seed);
  std::size_t cursor = rows;  // forces a shuffle on the first step

  auto params = model.parameters();
  std::vector<std::vector<double>> velocity;
  velocity.reserve(params.size());
  for (auto* p : params) velocity.emplace_back(p->value.size(), 0.0);

  TrainResult result;
  for (int step = 0; step < s.steps; ++step) {
    if (cursor + batch > rows) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    std::span<const std::size_t> idx(order.data() + cursor, batch);
    cursor += batch;
    const Tensor x = gather_rows(data.train_x, idx);
    const auto y = gather_labels(data.train_y, idx);
    result.last_loss = gradients(model, x, y, s.weight_decay).loss;
    const double lr = learning_rate_at(s, step);
    for (std::size_t p = 0; p < params.size(); ++p) {
      auto w = params[p]->value.values();
      auto g = params[p]->grad.values();
      auto& v = velocity[p];
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = s.momentum * v[i] + g[i];
        w[i] -= lr * v[i];
      }
    }
    result.steps = step + 1;
  }
  result.train_accuracy = evaluate_accuracy(model, data.train_x, data.train_y);
  result.val_accuracy = evaluate_accuracy(model, data.val_x, data.val_y);
  return result;
}

double evaluate_accuracy(Model& model, const Tensor& x, std::span<const int> y, int batch) {
  const auto rows = static_cast<std::size_t>(x.batch());
  if (rows == 0) return 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < rows; start += static_cast<std::size_t>(batch)) {
    const auto end = std::min(rows, start + static_cast<std::size_t>(batch));
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor logits = model.forward(gather_rows(x, idx), Mode::kEval);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      std::int64_t arg = 0;
      for (std::int64_t k = 1; k < logits.channels(); ++k) {
        if (logits.at(static_cast<std::int64_t>(r), k, 0, 0) >
            logits.at(static_cast<std::int64_t>(r), arg, 0, 0)) {
          arg = k;
        }
      }
      if (arg == y[start + r]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(rows);
}

}  // namespace hiernas::nn
