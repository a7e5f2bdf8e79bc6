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

#ifndef HIERNAS_CORE_SEARCH_H_
#define HIERNAS_CORE_SEARCH_H_

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/fitness.h"
#include "core/genotype.h"
#include "core/mutation.h"
#include "core/rng.h"

namespace hiernas {

struct SearchConfig {
  int population_size = 200;
  int total_steps = 7000;
  double tournament_fraction = 0.05;
  int init_mutations = 1000;
  int workers = 1;
  std::uint64_t seed = 0;
  HierarchySpec representation;
  std::string fitness_backend = "surrogate";
  int eval_runs = 4;
  std::optional<std::uint64_t> param_threshold;
  int checkpoint_every = 50;  // records between checkpoints; 0 disables
};

// Throws std::invalid_argument naming the first bad field.
void check_search_config(const SearchConfig& cfg);

struct FitnessRecord {
  GenotypeId id;
  double fitness = 0.0;
  std::uint64_t param_count = 0;
  int eval_runs = 0;
  std::uint64_t step_index = 0;  // 1-based position in the table
  double wall_time = 0.0;        // seconds since the run started
  double best_so_far = 0.0;
  std::optional<MutationTrace> trace;  // absent for the initial population
  std::string failure;                 // non-empty when evaluation failed
};

struct Individual {
  Genotype genotype;
  FitnessRecord record;
};

// A genotype dispatched to the workers but not yet recorded.
struct WorkItem {
  Genotype genotype;
  std::optional<MutationTrace> trace;
};

// Append-only table of evaluated genotypes, shared by the controller and
// workers. It also tracks dispatched work so checkpoints see a consistent
// (records, in-flight) pair.
class MemoryTable {
 public:
  using Row = std::shared_ptr<const Individual>;
  // Runs under the table lock, once per appended row, in step order.
  using Observer = std::function<void(const Individual&)>;

  void set_observer(Observer observer);
  // Loads rows from a checkpoint. Only valid while the table is empty.
  void restore(std::vector<Row> rows);

  // Assigns step_index and best_so_far. Throws std::logic_error on a
  // duplicate id.
  Row append(const Genotype& g, FitnessRecord record);
  void add_pending(WorkItem item);

  std::size_t size() const;
  std::vector<Row> snapshot() const;
  std::vector<WorkItem> pending() const;
  std::pair<std::vector<Row>, std::vector<WorkItem>> snapshot_with_pending() const;
  Row find(GenotypeId id) const;  // null when absent
  // Highest fitness, ties to the lowest id; null when empty.
  Row best() const;
  // Blocks until the table holds n rows (true) or interrupt() is called.
  bool wait_for_size(std::size_t n) const;
  void interrupt();

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable grew_;
  std::vector<Row> rows_;
  std::unordered_map<std::uint64_t, std::size_t> by_id_;
  std::map<std::uint64_t, WorkItem> pending_;
  Observer observer_;
  bool interrupted_ = false;
};

// Deterministic text of the rows. Wall times are omitted unless asked for,
// so two replays of one seed compare equal byte for byte.
std::string canonical_text(std::span<const MemoryTable::Row> rows, bool include_timing = false);
MemoryTable::Row best_of(std::span<const MemoryTable::Row> rows);

// Multi-consumer FIFO.
template <class T>
class WorkQueue {
 public:
  void push(T item) {
    {
      std::lock_guard lock(mu_);
      items_.push_back(std::move(item));
    }
    changed_.notify_all();
  }

  // Blocks until an item is available; nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    ++waiting_;
    changed_.notify_all();
    changed_.wait(lock, [&] { return !items_.empty() || closed_; });
    --waiting_;
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

  // Blocks until some consumer waits on an empty queue, or the queue closes.
  // Returns false when closed.
  bool wait_idle() {
    std::unique_lock lock(mu_);
    changed_.wait(lock, [&] { return (waiting_ > 0 && items_.empty()) || closed_; });
    return !closed_;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    changed_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }

 private:
  mutable std::mutex mu_;
  std::condition_variable changed_;
  std::deque<T> items_;
  int waiting_ = 0;
  bool closed_ = false;
};

// Initial individual `index` (0-based): diversify(trivial, init_mutations)
// driven by the substream derive_seed(seed, kInitPopulation, index), with id
// index + 1.
Genotype initial_genotype(const SearchConfig& cfg, int index);
std::vector<Genotype> init_population(const SearchConfig& cfg);

// ceil(fraction * n), clamped to [1, n].
std::size_t tournament_size(double fraction, std::size_t n);
// Samples tournament_size rows without replacement (partial Fisher-Yates)
// and returns the fittest, ties to the lowest id.
GenotypeId tournament_select(std::span<const MemoryTable::Row> rows, double fraction, Rng& rng);

enum class SearchMode { kEvolve, kRandom };
const char* search_mode_name(SearchMode mode);

// Everything needed to continue a run.
struct SearchState {
  std::vector<MemoryTable::Row> rows;
  std::vector<WorkItem> pending;
  std::string rng_state;
  std::uint64_t next_id = 1;
  std::uint64_t dispatched = 0;
  double elapsed = 0.0;
};

struct SearchHooks {
  std::function<void(const Individual&)> on_record;
  // Called every checkpoint_every records and once when the run ends.
  std::function<void(const SearchState&)> on_checkpoint;
  // Polled by the controller before each dispatch.
  std::function<bool(std::size_t records)> should_stop;
};

struct SearchResult {
  MemoryTable::Row best;
  std::vector<MemoryTable::Row> rows;
  bool completed = false;  // false when stopped early
};

// Records budget: total_steps for evolution, population_size for random search.
std::size_t search_budget(SearchMode mode, const SearchConfig& cfg);

// Runs the controller/worker protocol. workers = 1 uses a single-threaded
// interleaved loop, which is fully deterministic. Evaluation failures become
// fitness-0 records. `resume` continues from a checkpointed state.
SearchResult run_search(SearchMode mode, const SearchConfig& cfg, const Evaluator& evaluator,
                        const SearchHooks& hooks = {}, const SearchState* resume = nullptr);

inline SearchResult evolve(const SearchConfig& cfg, const Evaluator& evaluator,
                           const SearchHooks& hooks = {}) {
  return run_search(SearchMode::kEvolve, cfg, evaluator, hooks);
}
inline SearchResult random_search(const SearchConfig& cfg, const Evaluator& evaluator,
                                  const SearchHooks& hooks = {}) {
  return run_search(SearchMode::kRandom, cfg, evaluator, hooks);
}

}  // namespace hiernas

#endif  // HIERNAS_CORE_SEARCH_H_
