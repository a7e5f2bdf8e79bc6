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

#ifndef HIERNAS_CORE_FITNESS_H_
#define HIERNAS_CORE_FITNESS_H_

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "core/assembly.h"
#include "core/genotype.h"
#include "nnexec/dataset.h"
#include "nnexec/trainer.h"

namespace hiernas {

// Outcome of scoring one genotype.
struct Evaluation {
  double fitness = 0.0;  // in [0, 1]
  std::uint64_t param_count = 0;
  int runs = 1;
};

// Evaluators are shared between worker threads; evaluate() must be safe to
// call concurrently.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  // One evaluation run. Throws DegenerateArchitecture / EvaluationFailure.
  virtual Evaluation evaluate(const Genotype& g, std::uint64_t seed) const = 0;
  // True when the result does not depend on the seed, so averaging over
  // runs can be computed from a single call.
  virtual bool seed_independent() const { return false; }
  virtual std::string name() const = 0;
};

// Mean over `runs` calls of inner.evaluate with per-run seeds
// derive_seed(seed, kEvaluationRun, r).
Evaluation evaluate_averaged(const Evaluator& inner, const Genotype& g, int runs,
                             std::uint64_t seed);

// Parameters of one cell whose input has C channels (C = spec.channels).
std::uint64_t cell_parameters(const Genotype& g);
std::uint64_t cell_parameters(const FlatArchitecture& a, int channels);

// Target share of each primitive op, indexed by PrimitiveOp value - 1.
inline constexpr std::array<double, 6> kSurrogateTarget{0.05, 0.15, 0.10, 0.40, 0.10, 0.20};
inline constexpr double kSurrogateDepthScale = 4.0;

// Normalized counts of each primitive among a's edges.
std::array<double, 6> op_histogram(const FlatArchitecture& a);

// (1 - total variation to the target histogram) * (1 - exp(-depth / 4)).
double surrogate_fitness(const FlatArchitecture& a);

class SurrogateEvaluator : public Evaluator {
 public:
  Evaluation evaluate(const Genotype& g, std::uint64_t seed) const override;
  bool seed_independent() const override { return true; }
  std::string name() const override { return "surrogate"; }
};

// Half surrogate, half a saturating reward on the cell parameter count:
// 0.5 * surrogate + 0.5 * (1 - exp(-params / (100 * C^2))).
class ParamRewardEvaluator : public Evaluator {
 public:
  Evaluation evaluate(const Genotype& g, std::uint64_t seed) const override;
  bool seed_independent() const override { return true; }
  std::string name() const override { return "param_reward"; }
};

// Scores 0 when the cell has more than `threshold` parameters, otherwise
// defers to `inner`.
class ConstrainedEvaluator : public Evaluator {
 public:
  ConstrainedEvaluator(std::shared_ptr<const Evaluator> inner, std::uint64_t threshold);
  Evaluation evaluate(const Genotype& g, std::uint64_t seed) const override;
  bool seed_independent() const override { return inner_->seed_independent(); }
  std::string name() const override;
  std::uint64_t threshold() const { return threshold_; }

 private:
  std::shared_ptr<const Evaluator> inner_;
  std::uint64_t threshold_;
};

std::shared_ptr<const Evaluator> constrain(std::shared_ptr<const Evaluator> inner,
                                           std::uint64_t threshold);

// Model skeleton, data and optimizer for trainer-backed fitness.
struct TrainerConfig {
  std::int64_t stem_channels = 8;
  int cells_per_group = 1;
  int groups = 2;
  int classes = 4;
  int image_size = 8;
  int per_class = 40;
  std::uint64_t dataset_seed = 0;
  nn::TrainerSettings settings;
};

// Throws std::invalid_argument for unusable settings (including a skeleton
// whose reductions would underflow image_size).
void check_trainer_config(const TrainerConfig& cfg);

// One training run: weights from derive_seed(seed, kWeights, 0), batch order
// from derive_seed(seed, kBatches, 0). Returns held-out accuracy.
double trained_fitness_single(const Genotype& g, const TrainerConfig& cfg,
                              const nn::Dataset& data, std::uint64_t seed);
// Mean of `runs` single runs with seeds derive_seed(seed, kEvaluationRun, r).
double trained_fitness(const Genotype& g, const TrainerConfig& cfg, int runs,
                       std::uint64_t seed);

class TrainerEvaluator : public Evaluator {
 public:
  explicit TrainerEvaluator(TrainerConfig cfg);
  Evaluation evaluate(const Genotype& g, std::uint64_t seed) const override;
  std::string name() const override { return "trainer"; }
  const nn::Dataset& dataset() const { return *data_; }

 private:
  TrainerConfig cfg_;
  std::shared_ptr<const nn::Dataset> data_;
};

}  // namespace hiernas

#endif  // HIERNAS_CORE_FITNESS_H_
