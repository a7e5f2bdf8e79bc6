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

#include "core/fitness.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "core/rng.h"
#include "nnexec/model.h"

namespace hiernas {

Evaluation evaluate_averaged(const Evaluator& inner, const Genotype& g, int runs,
                             std::uint64_t seed) {
  if (runs < 1) throw std::invalid_argument("evaluation needs at least one run");
  if (inner.seed_independent()) {
    Evaluation e = inner.evaluate(g, derive_seed(seed, Stream::kEvaluationRun, 0));
    e.runs = runs;
    return e;
  }
  Evaluation total{0.0, 0, runs};
  for (int r = 0; r < runs; ++r) {
    const auto e =
        inner.evaluate(g, derive_seed(seed, Stream::kEvaluationRun, static_cast<std::uint64_t>(r)));
    total.fitness += e.fitness;
    total.param_count = e.param_count;
  }
  total.fitness /= runs;
  return total;
}

std::uint64_t cell_parameters(const FlatArchitecture& a, int channels) {
  return count_parameters(a, TensorShape{1, channels, 1, 1}, channels);
}

std::uint64_t cell_parameters(const Genotype& g) {
  return cell_parameters(flatten(g), g.spec().channels);
}

std::array<double, 6> op_histogram(const FlatArchitecture& a) {
  std::array<double, 6> h{};
  if (a.edges.empty()) return h;
  for (const auto& e : a.edges) h[static_cast<int>(e.op) - 1] += 1.0;
  for (auto& v : h) v /= static_cast<double>(a.edges.size());
  return h;
}

double surrogate_fitness(const FlatArchitecture& a) {
  const auto h = op_histogram(a);
  double distance = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) distance += std::abs(h[k] - kSurrogateTarget[k]);
  const double depth = longest_path(a);
  const double f = (1.0 - 0.5 * distance) * (1.0 - std::exp(-depth / kSurrogateDepthScale));
  return std::clamp(f, 0.0, 1.0);
}

Evaluation SurrogateEvaluator::evaluate(const Genotype& g, std::uint64_t) const {
  const auto flat = flatten(g);
  return {surrogate_fitness(flat), cell_parameters(flat, g.spec().channels), 1};
}

Evaluation ParamRewardEvaluator::evaluate(const Genotype& g, std::uint64_t) const {
  const auto flat = flatten(g);
  const auto params = cell_parameters(flat, g.spec().channels);
  const double c = g.spec().channels;
  const double reward = 1.0 - std::exp(-static_cast<double>(params) / (100.0 * c * c));
  const double f = 0.5 * surrogate_fitness(flat) + 0.5 * reward;
  return {std::clamp(f, 0.0, 1.0), params, 1};
}

ConstrainedEvaluator::ConstrainedEvaluator(std::shared_ptr<const Evaluator> inner,
                                           std::uint64_t threshold)
    : inner_(std::move(inner)), threshold_(threshold) {
  if (!inner_) throw std::invalid_argument("constrained evaluator needs an inner evaluator");
  if (threshold_ == 0) throw std::invalid_argument("parameter threshold must be > 0");
}

Evaluation ConstrainedEvaluator::evaluate(const Genotype& g, std::uint64_t seed) const {
  const auto params = cell_parameters(g);
  if (params > threshold_) return {0.0, params, 1};
  Evaluation e = inner_->evaluate(g, seed);
  e.param_count = params;
  return e;
}

std::string ConstrainedEvaluator::name() const {
  return fmt::format("{} (params <= {})", inner_->name(), threshold_);
}

std::shared_ptr<const Evaluator> constrain(std::shared_ptr<const Evaluator> inner,
                                           std::uint64_t threshold) {
  return std::make_shared<ConstrainedEvaluator>(std::move(inner), threshold);
}

// ---------------------------------------------------------------------------
// Trainer-backed fitness

void check_trainer_config(const TrainerConfig& cfg) {
  if (cfg.stem_channels < 1 || cfg.cells_per_group < 1 || cfg.groups < 1) {
    throw std::invalid_argument("trainer model needs stem_channels, cells_per_group, groups >= 1");
  }
  if (cfg.classes < 2 || cfg.per_class < 2 || cfg.image_size < 4) {
    throw std::invalid_argument("trainer data needs classes >= 2, per_class >= 2, image_size >= 4");
  }
  std::int64_t size = cfg.image_size;
  for (int g = 0; g < cfg.groups; ++g) {
    if (size < 2) {
      throw std::invalid_argument(fmt::format(
          "image_size {} is too small for {} stride-2 reductions", cfg.image_size, cfg.groups));
    }
    size = (size + 1) / 2;
  }
  nn::check_settings(cfg.settings);
}

double trained_fitness_single(const Genotype& g, const TrainerConfig& cfg,
                              const nn::Dataset& data, std::uint64_t seed) {
  nn::ModelSpec spec;
  spec.cell = flatten(g);
  spec.stem_channels = cfg.stem_channels;
  spec.cells_per_group = cfg.cells_per_group;
  spec.groups = cfg.groups;
  spec.num_classes = cfg.classes;
  spec.input_channels = 3;
  spec.image_size = cfg.image_size;
  try {
    auto model = nn::Model::build(spec, derive_seed(seed, Stream::kWeights, 0));
    auto settings = cfg.settings;
    settings.seed = derive_seed(seed, Stream::kBatches, 0);
    const auto result = nn::sgd_train(model, data, settings);
    return std::clamp(result.val_accuracy, 0.0, 1.0);
  } catch (const NumericFailure& e) {
    throw EvaluationFailure(fmt::format("training diverged: {}", e.what()));
  }
}

double trained_fitness(const Genotype& g, const TrainerConfig& cfg, int runs,
                       std::uint64_t seed) {
  check_trainer_config(cfg);
  if (runs < 1) throw std::invalid_argument("trained_fitness needs runs >= 1");
  const auto data = nn::synth_dataset(cfg.classes, cfg.per_class, cfg.image_size, cfg.dataset_seed);
  double total = 0.0;
  for (int r = 0; r < runs; ++r) {
    total += trained_fitness_single(
        g, cfg, data, derive_seed(seed, Stream::kEvaluationRun, static_cast<std::uint64_t>(r)));
  }
  return total / runs;
}

TrainerEvaluator::TrainerEvaluator(TrainerConfig cfg) : cfg_(std::move(cfg)) {
  check_trainer_config(cfg_);
  data_ = std::make_shared<const nn::Dataset>(
      nn::synth_dataset(cfg_.classes, cfg_.per_class, cfg_.image_size, cfg_.dataset_seed));
}

Evaluation TrainerEvaluator::evaluate(const Genotype& g, std::uint64_t seed) const {
  const auto params = cell_parameters(g);
  return {trained_fitness_single(g, cfg_, *data_, seed), params, 1};
}

}  // namespace hiernas
