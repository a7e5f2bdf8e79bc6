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

#include <atomic>
#include <chrono>
#include <set>
#include <stdexcept>
#include <thread>

#include "core/errors.h"
#include "core/fitness.h"
#include "core/search.h"

using namespace hiernas;

namespace {

MemoryTable::Row make_row(std::uint64_t id, double fitness) {
  IdCounter ids;
  auto g = trivial_genotype(HierarchySpec::flat(3, 4), ids).with_id(GenotypeId{id});
  FitnessRecord r;
  r.id = GenotypeId{id};
  r.fitness = fitness;
  return std::make_shared<const Individual>(Individual{std::move(g), r});
}

SearchConfig small_config(std::uint64_t seed, int population = 20, int steps = 120) {
  SearchConfig cfg;
  cfg.representation = HierarchySpec::hierarchical({6, 3, 1}, {{4, 4, 4}, {5}}, 8);
  cfg.population_size = population;
  cfg.total_steps = steps;
  cfg.init_mutations = 50;
  cfg.seed = seed;
  cfg.eval_runs = 1;
  return cfg;
}

// Seed-dependent evaluator with randomized latency; counts calls per id.
class SlowEvaluator : public Evaluator {
 public:
  Evaluation evaluate(const Genotype& g, std::uint64_t seed) const override {
    {
      std::lock_guard lock(mu_);
      ++calls_[g.id().value];
    }
    std::this_thread::sleep_for(std::chrono::microseconds(seed % 400));
    return {inner_.evaluate(g, seed).fitness, 0, 1};
  }
  std::string name() const override { return "slow"; }
  std::map<std::uint64_t, int> calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

 private:
  SurrogateEvaluator inner_;
  mutable std::mutex mu_;
  mutable std::map<std::uint64_t, int> calls_;
};

class FailingEvaluator : public Evaluator {
 public:
  Evaluation evaluate(const Genotype& g, std::uint64_t) const override {
    const auto id = g.id().value;
    if (id % 5 == 0) throw EvaluationFailure("simulated");
    if (id % 7 == 0) return {1.5, 0, 1};
    if (id % 11 == 0) return {std::nan(""), 0, 1};
    return {0.5, 0, 1};
  }
  bool seed_independent() const override { return true; }
  std::string name() const override { return "failing"; }
};

class CrashingEvaluator : public Evaluator {
 public:
  Evaluation evaluate(const Genotype& g, std::uint64_t) const override {
    if (g.id().value == 9) throw std::runtime_error("crash");
    return {0.5, 0, 1};
  }
  std::string name() const override { return "crashing"; }
};

void check_invariants(const SearchResult& result, std::size_t expected) {
  REQUIRE(result.rows.size() == expected);
  std::set<std::uint64_t> ids;
  double running = 0.0;
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i]->record;
    CHECK(ids.insert(r.id.value).second);
    CHECK(r.step_index == i + 1);
    CHECK(r.fitness >= 0.0);
    CHECK(r.fitness <= 1.0);
    running = std::max(running, r.fitness);
    CHECK(r.best_so_far == running);
    if (i > 0) CHECK(r.best_so_far >= result.rows[i - 1]->record.best_so_far);
  }
  REQUIRE(result.best);
  CHECK(result.best->record.fitness == running);
}

}  // namespace

TEST_CASE("tournament size is the rounded-up fraction of the table") {
  CHECK(tournament_size(0.05, 200) == 10);
  CHECK(tournament_size(0.05, 201) == 11);
  CHECK(tournament_size(0.05, 1) == 1);
  CHECK(tournament_size(0.05, 20) == 1);
  CHECK(tournament_size(0.05, 21) == 2);
  CHECK(tournament_size(1.0, 7) == 7);
  CHECK(tournament_size(0.3, 10) == 3);
}

TEST_CASE("tournament selection examples") {
  std::vector<MemoryTable::Row> rows{make_row(1, 0.1), make_row(2, 0.9), make_row(3, 0.5)};
  Rng rng(1);
  for (int t = 0; t < 10; ++t) CHECK(tournament_select(rows, 1.0, rng).value == 2);
  std::vector<MemoryTable::Row> single{make_row(4, 0.2)};
  CHECK(tournament_select(single, 0.05, rng).value == 4);
  std::vector<MemoryTable::Row> tied{make_row(9, 0.7), make_row(3, 0.7), make_row(5, 0.7)};
  CHECK(tournament_select(tied, 1.0, rng).value == 3);
  std::vector<MemoryTable::Row> empty;
  CHECK_THROWS(tournament_select(empty, 0.5, rng));
}

TEST_CASE("tournament winner is the argmax of a replayed uniform sample") {
  std::vector<MemoryTable::Row> rows;
  Rng fill(3);
  for (std::uint64_t i = 1; i <= 200; ++i) {
    rows.push_back(make_row(i, static_cast<double>(uniform_int<int>(fill, 0, 50)) / 50.0));
  }
  Rng rng(77);
  std::vector<int> hits(200, 0);
  for (int trial = 0; trial < 300; ++trial) {
    Rng replay = rng;
    const auto winner = tournament_select(rows, 0.05, rng);
    // Replay the draws as an independent partial shuffle.
    std::vector<std::size_t> pool(200);
    for (std::size_t i = 0; i < 200; ++i) pool[i] = i;
    std::set<std::size_t> sample;
    for (std::size_t t = 0; t < 10; ++t) {
      const auto j = uniform_int<std::size_t>(replay, t, 199);
      std::swap(pool[t], pool[j]);
      sample.insert(pool[t]);
    }
    REQUIRE(sample.size() == 10);
    std::size_t best = *sample.begin();
    for (auto s : sample) {
      const auto& a = rows[s]->record;
      const auto& b = rows[best]->record;
      if (a.fitness > b.fitness || (a.fitness == b.fitness && a.id < b.id)) best = s;
    }
    CHECK(winner == rows[best]->record.id);
    for (auto s : sample) ++hits[s];
  }
  // Every row can be drawn.
  int drawn = 0;
  for (int h : hits) drawn += h > 0;
  CHECK(drawn > 150);
}

TEST_CASE("initial population") {
  auto cfg = small_config(4, 1, 1);
  const auto one = init_population(cfg);
  REQUIRE(one.size() == 1);
  CHECK(one[0].id().value == 1);

  cfg = small_config(4, 30, 30);
  const auto pop = init_population(cfg);
  const auto again = init_population(cfg);
  REQUIRE(pop.size() == 30);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(validate(pop[i]).ok());
    CHECK(pop[i].id().value == i + 1);
    CHECK(structurally_equal(pop[i], again[i]));
    CHECK(structurally_equal(pop[i], initial_genotype(cfg, static_cast<int>(i))));
    for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(structurally_equal(pop[i], pop[j]));
  }
}

TEST_CASE("memory table bookkeeping") {
  MemoryTable table;
  CHECK_FALSE(table.best());
  IdCounter ids;
  const auto g = trivial_genotype(HierarchySpec::flat(3, 4), ids);
  std::vector<double> seen;
  table.set_observer([&](const Individual& ind) { seen.push_back(ind.record.fitness); });
  FitnessRecord r;
  r.id = GenotypeId{1};
  r.fitness = 0.4;
  table.append(g.with_id(GenotypeId{1}), r);
  r.id = GenotypeId{2};
  r.fitness = 0.2;
  table.append(g.with_id(GenotypeId{2}), r);
  r.id = GenotypeId{3};
  r.fitness = 0.4;
  table.add_pending(WorkItem{g.with_id(GenotypeId{3}), std::nullopt});
  CHECK(table.pending().size() == 1);
  table.append(g.with_id(GenotypeId{3}), r);
  CHECK(table.pending().empty());
  CHECK(table.size() == 3);
  CHECK(seen == std::vector<double>{0.4, 0.2, 0.4});
  const auto rows = table.snapshot();
  CHECK(rows[1]->record.step_index == 2);
  CHECK(rows[1]->record.best_so_far == 0.4);
  CHECK(table.best()->record.id.value == 1);
  CHECK(table.find(GenotypeId{2})->record.fitness == 0.2);
  CHECK_FALSE(table.find(GenotypeId{42}));
  r.id = GenotypeId{2};
  CHECK_THROWS_AS(table.append(g.with_id(GenotypeId{2}), r), std::logic_error);
  CHECK(table.size() == 3);
}

TEST_CASE("memory table waits and interrupts") {
  MemoryTable table;
  IdCounter ids;
  const auto g = trivial_genotype(HierarchySpec::flat(3, 4), ids);
  std::thread writer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    FitnessRecord r;
    r.id = GenotypeId{1};
    table.append(g, r);
  });
  CHECK(table.wait_for_size(1));
  writer.join();
  std::thread interrupter([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    table.interrupt();
  });
  CHECK_FALSE(table.wait_for_size(5));
  interrupter.join();
}

TEST_CASE("work queue is FIFO and drains after close") {
  WorkQueue<int> q;
  q.push(1);
  q.push(2);
  q.push(3);
  CHECK(q.size() == 3);
  CHECK(*q.pop() == 1);
  q.close();
  CHECK(*q.pop() == 2);
  CHECK(*q.pop() == 3);
  CHECK_FALSE(q.pop());
  CHECK_FALSE(q.wait_idle());

  WorkQueue<int> idle;
  std::thread consumer([&] {
    while (auto v = idle.pop()) {
    }
  });
  CHECK(idle.wait_idle());
  idle.close();
  consumer.join();
}

TEST_CASE("single-worker evolution is deterministic and exact") {
  SurrogateEvaluator surrogate;
  const auto cfg = small_config(5);
  const auto a = evolve(cfg, surrogate);
  const auto b = evolve(cfg, surrogate);
  check_invariants(a, 120);
  CHECK(a.completed);
  CHECK(canonical_text(a.rows) == canonical_text(b.rows));
  CHECK(canonical_text(a.rows) != canonical_text(evolve(small_config(6), surrogate).rows));
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& r = a.rows[i]->record;
    if (i < 20) {
      CHECK(r.id.value == i + 1);
      CHECK_FALSE(r.trace);
    } else {
      CHECK(r.trace);
      CHECK(r.id.value > 20);
    }
    CHECK(r.eval_runs == 1);
  }
}

TEST_CASE("evolution improves on its initial population") {
  SurrogateEvaluator surrogate;
  auto cfg = small_config(8, 20, 400);
  const auto result = evolve(cfg, surrogate);
  double init_best = 0.0;
  for (int i = 0; i < 20; ++i) init_best = std::max(init_best, result.rows[i]->record.fitness);
  CHECK(result.best->record.fitness > init_best);
}

TEST_CASE("random search evaluates exactly the initial population") {
  SurrogateEvaluator surrogate;
  auto cfg = small_config(9, 25, 25);
  const auto result = random_search(cfg, surrogate);
  check_invariants(result, 25);
  const auto pop = init_population(cfg);
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK_FALSE(result.rows[i]->record.trace);
    CHECK(structurally_equal(result.rows[i]->genotype, pop[i]));
  }
  CHECK(result.best->record.fitness >= result.rows[0]->record.fitness);

  cfg = small_config(9, 1, 1);
  const auto single = random_search(cfg, surrogate);
  REQUIRE(single.rows.size() == 1);
  CHECK(single.best == single.rows[0]);
}

TEST_CASE("failed evaluations are recorded with fitness zero") {
  FailingEvaluator failing;
  for (int workers : {1, 3}) {
    auto cfg = small_config(2, 10, 60);
    cfg.workers = workers;
    const auto result = evolve(cfg, failing);
    check_invariants(result, 60);
    for (const auto& row : result.rows) {
      const auto& r = row->record;
      const auto id = r.id.value;
      if (id % 5 == 0) {
        CHECK(r.fitness == 0.0);
        CHECK(r.failure.rfind("EvaluationFailure: simulated", 0) == 0);
      } else if (id % 7 == 0 || id % 11 == 0) {
        CHECK(r.fitness == 0.0);
        CHECK_FALSE(r.failure.empty());
      } else {
        CHECK(r.fitness == 0.5);
        CHECK(r.failure.empty());
      }
    }
  }
}

TEST_CASE("degenerate genotypes score zero and the run continues") {
  SurrogateEvaluator surrogate;
  SearchConfig cfg;
  cfg.representation = HierarchySpec::flat(3, 4);
  cfg.population_size = 200;
  cfg.total_steps = 200;
  cfg.init_mutations = 20;
  cfg.eval_runs = 1;
  const auto result = random_search(cfg, surrogate);
  check_invariants(result, 200);
  int degenerate = 0;
  for (const auto& row : result.rows) {
    if (row->record.failure.rfind("DegenerateArchitecture", 0) == 0) {
      ++degenerate;
      CHECK(row->record.fitness == 0.0);
    }
  }
  CHECK(degenerate > 0);
}

TEST_CASE("unexpected evaluator exceptions abort the run") {
  CrashingEvaluator crashing;
  for (int workers : {1, 4}) {
    auto cfg = small_config(3, 10, 40);
    cfg.workers = workers;
    CHECK_THROWS_AS(evolve(cfg, crashing), std::runtime_error);
  }
}

TEST_CASE("parallel evolution keeps the table exact under random latency") {
  SlowEvaluator slow;
  auto cfg = small_config(12, 16, 160);
  cfg.workers = 8;
  cfg.eval_runs = 2;
  const auto result = evolve(cfg, slow);
  check_invariants(result, 160);
  CHECK(result.completed);
  const auto calls = slow.calls();
  CHECK(calls.size() == 160);
  // Degenerate genotypes fail on their first run.
  for (const auto& row : result.rows) {
    const auto& r = row->record;
    CHECK(calls.at(r.id.value) == (r.failure.empty() ? 2 : 1));
  }
}

TEST_CASE("checkpoints resume to the uninterrupted run") {
  SurrogateEvaluator surrogate;
  auto cfg = small_config(21, 20, 150);
  cfg.checkpoint_every = 50;
  std::vector<SearchState> states;
  SearchHooks hooks;
  hooks.on_checkpoint = [&](const SearchState& s) { states.push_back(s); };
  const auto full = evolve(cfg, surrogate, hooks);
  REQUIRE(states.size() == 4);  // 50, 100, 150 and the final one
  CHECK(states[0].rows.size() == 50);
  CHECK(states[1].rows.size() == 100);
  for (int k : {0, 1}) {
    const auto resumed = run_search(SearchMode::kEvolve, cfg, surrogate, {}, &states[k]);
    CHECK(resumed.completed);
    CHECK(canonical_text(resumed.rows) == canonical_text(full.rows));
  }
}

TEST_CASE("stopping early leaves an incomplete, resumable run") {
  SurrogateEvaluator surrogate;
  auto cfg = small_config(22, 20, 100);
  std::optional<SearchState> last;
  SearchHooks hooks;
  hooks.should_stop = [](std::size_t n) { return n >= 37; };
  hooks.on_checkpoint = [&](const SearchState& s) { last = s; };
  const auto partial = evolve(cfg, surrogate, hooks);
  CHECK_FALSE(partial.completed);
  CHECK(partial.rows.size() == 37);
  REQUIRE(last);
  const auto resumed = run_search(SearchMode::kEvolve, cfg, surrogate, {}, &*last);
  CHECK(canonical_text(resumed.rows) == canonical_text(evolve(cfg, surrogate).rows));
}

TEST_CASE("search configuration validation") {
  auto cfg = small_config(1, 20, 10);
  CHECK_THROWS(check_search_config(cfg));
  cfg = small_config(1);
  cfg.tournament_fraction = 0.0;
  CHECK_THROWS(check_search_config(cfg));
  cfg = small_config(1);
  cfg.workers = 0;
  CHECK_THROWS(check_search_config(cfg));
  cfg = small_config(1);
  cfg.eval_runs = 0;
  CHECK_THROWS(check_search_config(cfg));
  CHECK_NOTHROW(check_search_config(small_config(1)));
}
