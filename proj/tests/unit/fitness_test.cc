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

#include <doctest.h>

#include <cmath>

#include "core/errors.h"
#include "core/fitness.h"
#include "core/genotype.h"
#include "core/rng.h"
#include "oracles.h"

using namespace hiernas;

namespace {

FlatArchitecture chain_with_skips(const std::vector<PrimitiveOp>& chain,
                                  const std::vector<PrimitiveOp>& skips) {
  FlatArchitecture a;
  const int n = static_cast<int>(chain.size()) + 1;
  for (int v = 0; v < n; ++v) a.nodes.push_back({v, {}});
  a.source = 0;
  a.sink = n - 1;
  for (int v = 1; v < n; ++v) a.edges.push_back({v - 1, v, chain[v - 1], std::nullopt, {}});
  for (std::size_t s = 0; s < skips.size(); ++s) {
    a.edges.push_back({0, static_cast<int>(s) + 2, skips[s], std::nullopt, {}});
  }
  return a;
}

Genotype degenerate_flat() {
  IdCounter ids;
  return trivial_genotype(HierarchySpec::flat(3, 4), ids).with_edge(2, 1, 2, 1, 0);
}

// Seed-dependent stub that records nothing but the seed it saw.
class SeedEcho : public Evaluator {
 public:
  Evaluation evaluate(const Genotype&, std::uint64_t seed) const override {
    return {static_cast<double>(seed % 1000) / 1000.0, 7, 1};
  }
  std::string name() const override { return "echo"; }
};

TrainerConfig tiny_trainer() {
  TrainerConfig cfg;
  cfg.stem_channels = 4;
  cfg.per_class = 20;
  cfg.settings.steps = 60;
  return cfg;
}

}  // namespace

TEST_CASE("surrogate: identity chain of depth 12") {
  IdCounter ids;
  const auto a = flatten(trivial_genotype(HierarchySpec::flat(13, 4), ids));
  CHECK(longest_path(a) == 12);
  CHECK(surrogate_fitness(a) == doctest::Approx(0.05 * (1.0 - std::exp(-3.0))).epsilon(1e-12));
  CHECK(surrogate_fitness(a) == doctest::Approx(0.0475).epsilon(1e-3));
}

TEST_CASE("surrogate: histogram equal to the target at depth 12") {
  using P = PrimitiveOp;
  // 20 edges: counts (1, 3, 2, 8, 2, 4).
  const std::vector<P> chain{P::kIdentity, P::kConv1x1, P::kConv1x1, P::kConv1x1,
                             P::kDepthwiseConv3x3, P::kDepthwiseConv3x3, P::kSeparableConv3x3,
                             P::kSeparableConv3x3, P::kSeparableConv3x3, P::kSeparableConv3x3,
                             P::kMaxPool3x3, P::kMaxPool3x3};
  const std::vector<P> skips{P::kSeparableConv3x3, P::kSeparableConv3x3, P::kSeparableConv3x3,
                             P::kSeparableConv3x3, P::kAvgPool3x3, P::kAvgPool3x3,
                             P::kAvgPool3x3, P::kAvgPool3x3};
  const auto a = chain_with_skips(chain, skips);
  const auto h = op_histogram(a);
  for (int k = 0; k < 6; ++k) CHECK(h[k] == doctest::Approx(kSurrogateTarget[k]).epsilon(1e-12));
  CHECK(longest_path(a) == 12);
  CHECK(surrogate_fitness(a) == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-12));
}

TEST_CASE("surrogate: a single edge scores at most 1 - exp(-1/4)") {
  IdCounter ids;
  const auto base = trivial_genotype(HierarchySpec::flat(2, 4), ids);
  for (int k = 1; k <= 6; ++k) {
    const auto a = flatten(base.with_edge(2, 1, 2, 1, k));
    CHECK(surrogate_fitness(a) <= 1.0 - std::exp(-0.25) + 1e-12);
  }
}

TEST_CASE("surrogate agrees with the inline-expansion oracle") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto spec = oracle::random_spec(seed, 3, 5);
    const auto g = oracle::random_genotype(spec, seed, 40);
    const auto named = oracle::inline_expand(g);
    if (named.degenerate) {
      CHECK_THROWS_AS(SurrogateEvaluator().evaluate(g, 0), DegenerateArchitecture);
      continue;
    }
    CHECK(surrogate_fitness(flatten(g)) == doctest::Approx(oracle::surrogate(named)).epsilon(1e-12));
  }
}

TEST_CASE("surrogate ignores ids and motifs the cell never uses") {
  IdCounter ids;
  const auto spec = HierarchySpec::hierarchical({6, 2, 1}, {{3, 3}, {3}}, 8);
  auto g = oracle::random_genotype(spec, 11, 50);
  // Route the top motif through level-2 motif 1 only; motif 2 is then dead.
  for (int succ = 2; succ <= 3; ++succ) {
    for (int pred = 1; pred < succ; ++pred) g = g.with_edge(3, 1, succ, pred, 1);
  }
  const auto variant = g.with_edge(2, 2, 3, 1, g.motif(2, 2).op(3, 1) == 4 ? 5 : 4).with_id(ids.next());
  CHECK(surrogate_fitness(flatten(g)) == surrogate_fitness(flatten(variant)));
  CHECK(surrogate_fitness(flatten(decode(encode(g), ids))) == surrogate_fitness(flatten(g)));
}

TEST_CASE("every evaluator returns values in [0, 1]") {
  SurrogateEvaluator surrogate;
  ParamRewardEvaluator reward;
  const auto constrained = constrain(std::make_shared<ParamRewardEvaluator>(), 500);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto g = oracle::random_genotype(oracle::random_spec(seed, 3, 5), seed, 30);
    try {
      for (const Evaluator* e : {static_cast<const Evaluator*>(&surrogate),
                                 static_cast<const Evaluator*>(&reward), constrained.get()}) {
        const double f = e->evaluate(g, seed).fitness;
        CHECK(f >= 0.0);
        CHECK(f <= 1.0);
      }
    } catch (const DegenerateArchitecture&) {
    }
  }
}

TEST_CASE("parameter reward blends the surrogate with a saturating size bonus") {
  const auto g = oracle::random_genotype(HierarchySpec::flat(5, 6), 3, 40).with_edge(2, 1, 5, 1, 4);
  const auto a = flatten(g);
  const double params = static_cast<double>(cell_parameters(g));
  const double expected = 0.5 * surrogate_fitness(a) + 0.5 * (1.0 - std::exp(-params / 3600.0));
  const auto e = ParamRewardEvaluator().evaluate(g, 0);
  CHECK(e.fitness == doctest::Approx(expected).epsilon(1e-12));
  CHECK(e.param_count == cell_parameters(g));
}

TEST_CASE("constraint wrapper") {
  IdCounter ids;
  auto inner = std::make_shared<SurrogateEvaluator>();
  const auto chain = trivial_genotype(HierarchySpec::flat(6, 8), ids);
  CHECK(cell_parameters(chain) == 0);
  CHECK(constrain(inner, 1)->evaluate(chain, 0).fitness == inner->evaluate(chain, 0).fitness);

  const auto g = oracle::random_genotype(HierarchySpec::flat(5, 8), 9, 40).with_edge(2, 1, 5, 1, 2);
  const auto params = cell_parameters(g);
  REQUIRE(params > 1);
  const auto over = constrain(inner, params - 1)->evaluate(g, 0);
  CHECK(over.fitness == 0.0);
  CHECK(over.param_count == params);
  CHECK(constrain(inner, params)->evaluate(g, 0).fitness == inner->evaluate(g, 0).fitness);
  CHECK_THROWS(constrain(inner, 0));

  // Dominance: a looser threshold never lowers fitness.
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto r = oracle::random_genotype(HierarchySpec::flat(5, 8), seed, 30).with_edge(2, 1, 5, 1, 4);
    double previous = 0.0;
    for (std::uint64_t t : {50u, 200u, 500u, 1000u, 5000u}) {
      const double f = constrain(inner, t)->evaluate(r, 0).fitness;
      CHECK(f >= previous);
      previous = f;
    }
  }
}

TEST_CASE("averaging uses derived per-run seeds") {
  IdCounter ids;
  const auto g = trivial_genotype(HierarchySpec::flat(3, 4), ids);
  SeedEcho echo;
  const auto e = evaluate_averaged(echo, g, 4, 99);
  double mean = 0.0;
  for (std::uint64_t r = 0; r < 4; ++r) {
    mean += echo.evaluate(g, derive_seed(99, Stream::kEvaluationRun, r)).fitness / 4.0;
  }
  CHECK(e.fitness == doctest::Approx(mean).epsilon(1e-15));
  CHECK(e.runs == 4);
  CHECK(e.param_count == 7);
  CHECK_THROWS(evaluate_averaged(echo, g, 0, 1));

  SurrogateEvaluator surrogate;
  const auto s = evaluate_averaged(surrogate, g, 4, 5);
  CHECK(s.runs == 4);
  CHECK(s.fitness == surrogate.evaluate(g, 0).fitness);
}

TEST_CASE("trained fitness: mean of runs, deterministic, above chance") {
  IdCounter ids;
  const auto chain = trivial_genotype(HierarchySpec::flat(3, 4), ids);
  const auto cfg = tiny_trainer();
  const auto data = nn::synth_dataset(cfg.classes, cfg.per_class, cfg.image_size, cfg.dataset_seed);
  const double two = trained_fitness(chain, cfg, 2, 17);
  const double r0 = trained_fitness_single(chain, cfg, data, derive_seed(17, Stream::kEvaluationRun, 0));
  const double r1 = trained_fitness_single(chain, cfg, data, derive_seed(17, Stream::kEvaluationRun, 1));
  CHECK(two == doctest::Approx((r0 + r1) / 2.0).epsilon(1e-15));
  CHECK(trained_fitness(chain, cfg, 2, 17) == two);
  CHECK(two > 1.0 / cfg.classes);

  TrainerEvaluator evaluator(cfg);
  const auto e = evaluator.evaluate(chain, derive_seed(17, Stream::kEvaluationRun, 0));
  CHECK(e.fitness == r0);
  CHECK(e.param_count == 0);
  CHECK_THROWS_AS(trained_fitness(degenerate_flat(), cfg, 1, 0), DegenerateArchitecture);
}

TEST_CASE("diverging training becomes an evaluation failure") {
  IdCounter ids;
  const auto g = trivial_genotype(HierarchySpec::flat(3, 4), ids).with_edge(2, 1, 3, 1, 2);
  auto cfg = tiny_trainer();
  cfg.settings.schedule = {{0, 1e200}};
  cfg.settings.steps = 40;
  CHECK_THROWS_AS(trained_fitness(g, cfg, 1, 3), EvaluationFailure);
}
