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

#include "core/search.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace hiernas {

void check_search_config(const SearchConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (cfg.population_size < 1) fail("population_size must be >= 1");
  if (cfg.total_steps < cfg.population_size) fail("total_steps must be >= population_size");
  if (!(cfg.tournament_fraction > 0.0 && cfg.tournament_fraction <= 1.0)) {
    fail("tournament_fraction must be in (0, 1]");
  }
  if (cfg.init_mutations < 0) fail("init_mutations must be >= 0");
  if (cfg.workers < 1) fail("workers must be >= 1");
  if (cfg.eval_runs < 1) fail("eval_runs must be >= 1");
  if (cfg.checkpoint_every < 0) fail("checkpoint_every must be >= 0");
  if (cfg.param_threshold && *cfg.param_threshold == 0) fail("param_threshold must be > 0");
  const auto problems = cfg.representation.check();
  if (!problems.empty()) fail("representation: " + problems.front().to_string());
}

// ---------------------------------------------------------------------------
// MemoryTable

void MemoryTable::set_observer(Observer observer) {
  std::lock_guard lock(mu_);
  observer_ = std::move(observer);
}

void MemoryTable::restore(std::vector<Row> rows) {
  std::lock_guard lock(mu_);
  if (!rows_.empty()) throw std::logic_error("restore into a non-empty table");
  for (auto& row : rows) {
    if (!by_id_.emplace(row->record.id.value, rows_.size()).second) {
      throw std::logic_error(fmt::format("duplicate genotype id {}", row->record.id.value));
    }
    rows_.push_back(std::move(row));
  }
  grew_.notify_all();
}

MemoryTable::Row MemoryTable::append(const Genotype& g, FitnessRecord record) {
  Row row;
  {
    std::lock_guard lock(mu_);
    if (by_id_.count(g.id().value) != 0) {
      throw std::logic_error(fmt::format("genotype id {} recorded twice", g.id().value));
    }
    record.id = g.id();
    record.step_index = rows_.size() + 1;
    record.best_so_far =
        rows_.empty() ? record.fitness : std::max(rows_.back()->record.best_so_far, record.fitness);
    row = std::make_shared<const Individual>(Individual{g, std::move(record)});
    by_id_.emplace(g.id().value, rows_.size());
    rows_.push_back(row);
    pending_.erase(g.id().value);
    if (observer_) observer_(*row);
  }
  grew_.notify_all();
  return row;
}

void MemoryTable::add_pending(WorkItem item) {
  std::lock_guard lock(mu_);
  const auto id = item.genotype.id().value;
  pending_.insert_or_assign(id, std::move(item));
}

std::size_t MemoryTable::size() const {
  std::lock_guard lock(mu_);
  return rows_.size();
}

std::vector<MemoryTable::Row> MemoryTable::snapshot() const {
  std::lock_guard lock(mu_);
  return rows_;
}

std::vector<WorkItem> MemoryTable::pending() const {
  std::lock_guard lock(mu_);
  std::vector<WorkItem> out;
  for (const auto& [id, item] : pending_) out.push_back(item);
  return out;
}

std::pair<std::vector<MemoryTable::Row>, std::vector<WorkItem>>
MemoryTable::snapshot_with_pending() const {
  std::lock_guard lock(mu_);
  std::vector<WorkItem> items;
  for (const auto& [id, item] : pending_) items.push_back(item);
  return {rows_, std::move(items)};
}

MemoryTable::Row MemoryTable::find(GenotypeId id) const {
  std::lock_guard lock(mu_);
  auto it = by_id_.find(id.value);
  return it == by_id_.end() ? nullptr : rows_[it->second];
}

MemoryTable::Row MemoryTable::best() const {
  std::lock_guard lock(mu_);
  return best_of(rows_);
}

bool MemoryTable::wait_for_size(std::size_t n) const {
  std::unique_lock lock(mu_);
  grew_.wait(lock, [&] { return rows_.size() >= n || interrupted_; });
  return rows_.size() >= n;
}

void MemoryTable::interrupt() {
  {
    std::lock_guard lock(mu_);
    interrupted_ = true;
  }
  grew_.notify_all();
}

MemoryTable::Row best_of(std::span<const MemoryTable::Row> rows) {
  MemoryTable::Row best;
  for (const auto& row : rows) {
    if (!best || row->record.fitness > best->record.fitness ||
        (row->record.fitness == best->record.fitness && row->record.id < best->record.id)) {
      best = row;
    }
  }
  return best;
}

std::string canonical_text(std::span<const MemoryTable::Row> rows, bool include_timing) {
  std::string out;
  for (const auto& row : rows) {
    const auto& r = row->record;
    out += fmt::format("step {} id {} fitness {:.17g} params {} runs {} best {:.17g}",
                       r.step_index, r.id.value, r.fitness, r.param_count, r.eval_runs,
                       r.best_so_far);
    if (r.trace) {
      const auto& t = *r.trace;
      out += fmt::format(" edit {} {} {} {} {} {}", t.level, t.motif, t.succ, t.pred, t.old_op,
                         t.new_op);
    }
    if (!r.failure.empty()) out += " failure " + r.failure;
    if (include_timing) out += fmt::format(" wall {:.6f}", r.wall_time);
    out += '\n';
    out += encode(row->genotype);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Initialization and selection

Genotype initial_genotype(const SearchConfig& cfg, int index) {
  IdCounter scratch;
  const Genotype trivial = trivial_genotype(cfg.representation, scratch);
  Rng rng(derive_seed(cfg.seed, Stream::kInitPopulation, static_cast<std::uint64_t>(index)));
  Genotype g = diversify(trivial, cfg.init_mutations, rng, scratch);
  return g.with_id(GenotypeId{static_cast<std::uint64_t>(index) + 1});
}

std::vector<Genotype> init_population(const SearchConfig& cfg) {
  std::vector<Genotype> out;
  out.reserve(static_cast<std::size_t>(cfg.population_size));
  for (int i = 0; i < cfg.population_size; ++i) out.push_back(initial_genotype(cfg, i));
  return out;
}

std::size_t tournament_size(double fraction, std::size_t n) {
  if (n == 0) return 0;
  const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, n);
}

GenotypeId tournament_select(std::span<const MemoryTable::Row> rows, double fraction, Rng& rng) {
  if (rows.empty()) throw std::invalid_argument("tournament over an empty table");
  const auto n = rows.size();
  const auto k = tournament_size(fraction, n);
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  const Individual* winner = nullptr;
  for (std::size_t t = 0; t < k; ++t) {
    std::swap(idx[t], idx[uniform_int<std::size_t>(rng, t, n - 1)]);
    const Individual* cand = rows[idx[t]].get();
    if (!winner || cand->record.fitness > winner->record.fitness ||
        (cand->record.fitness == winner->record.fitness && cand->record.id < winner->record.id)) {
      winner = cand;
    }
  }
  return winner->record.id;
}

const char* search_mode_name(SearchMode mode) {
  return mode == SearchMode::kEvolve ? "evolve" : "random";
}

std::size_t search_budget(SearchMode mode, const SearchConfig& cfg) {
  return static_cast<std::size_t>(mode == SearchMode::kEvolve ? cfg.total_steps
                                                              : cfg.population_size);
}

// ---------------------------------------------------------------------------
// Controller / workers

namespace {

class Engine {
 public:
  Engine(SearchMode mode, const SearchConfig& cfg, const Evaluator& evaluator,
         const SearchHooks& hooks, const SearchState* resume)
      : cfg_(cfg),
        evaluator_(evaluator),
        hooks_(hooks),
        budget_(search_budget(mode, cfg)),
        rng_(derive_seed(cfg.seed, Stream::kController, 0)),
        ids_(static_cast<std::uint64_t>(cfg.population_size) + 1) {
    if (resume) {
      table_.restore(resume->rows);
      for (const auto& item : resume->pending) redispatch_.push_back(item);
      if (!restore_rng_state(rng_, resume->rng_state)) {
        throw std::invalid_argument("unreadable controller rng state");
      }
      ids_.reset(resume->next_id);
      dispatched_ = resume->dispatched;
      elapsed_offset_ = resume->elapsed;
      last_checkpoint_ = table_.size();
    }
    if (hooks_.on_record) table_.set_observer(hooks_.on_record);
  }

  SearchResult run() {
    start_ = std::chrono::steady_clock::now();
    const bool stopped = cfg_.workers == 1 ? run_serial() : run_parallel();
    if (hooks_.on_checkpoint) hooks_.on_checkpoint(capture());
    SearchResult result;
    result.rows = table_.snapshot();
    result.best = best_of(result.rows);
    result.completed = !stopped && result.rows.size() >= budget_;
    return result;
  }

 private:
  bool work_left() const { return dispatched_ < budget_ || !redispatch_.empty(); }

  bool stop_requested() {
    return hooks_.should_stop && hooks_.should_stop(table_.size());
  }

  bool in_init_phase() const {
    return !redispatch_.empty() || dispatched_ < static_cast<std::size_t>(cfg_.population_size);
  }

  WorkItem next_item() {
    if (!redispatch_.empty()) {
      WorkItem item = std::move(redispatch_.front());
      redispatch_.pop_front();
      return item;
    }
    if (dispatched_ < static_cast<std::size_t>(cfg_.population_size)) {
      const auto index = static_cast<int>(dispatched_++);
      return WorkItem{initial_genotype(cfg_, index), std::nullopt};
    }
    const auto rows = table_.snapshot();
    const auto parent = table_.find(tournament_select(rows, cfg_.tournament_fraction, rng_));
    auto [child, trace] = mutate(parent->genotype, rng_, ids_);
    ++dispatched_;
    return WorkItem{std::move(child), trace};
  }

  double elapsed() const {
    return elapsed_offset_ +
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void evaluate_and_record(const WorkItem& item) {
    const Genotype& g = item.genotype;
    FitnessRecord r;
    r.eval_runs = cfg_.eval_runs;
    r.trace = item.trace;
    try {
      const auto e = evaluate_averaged(evaluator_, g, cfg_.eval_runs,
                                       derive_seed(cfg_.seed, Stream::kEvaluation, g.id().value));
      r.fitness = e.fitness;
      r.param_count = e.param_count;
      r.eval_runs = e.runs;
      if (!std::isfinite(r.fitness) || r.fitness < 0.0 || r.fitness > 1.0) {
        r.failure = fmt::format("fitness {} outside [0, 1]", r.fitness);
        r.fitness = 0.0;
      }
    } catch (const Error& e) {
      r.fitness = 0.0;
      r.failure = fmt::format("{}: {}", error_code_name(e.code()), e.what());
      try {
        r.param_count = cell_parameters(g);
      } catch (const Error&) {
        r.param_count = 0;
      }
    }
    r.wall_time = elapsed();
    table_.append(g, std::move(r));
  }

  SearchState capture() {
    auto [rows, pending] = table_.snapshot_with_pending();
    SearchState s;
    s.rows = std::move(rows);
    s.pending = std::move(pending);
    for (const auto& item : redispatch_) s.pending.push_back(item);
    s.rng_state = rng_state(rng_);
    s.next_id = ids_.peek();
    s.dispatched = dispatched_;
    s.elapsed = elapsed();
    return s;
  }

  void maybe_checkpoint() {
    if (!hooks_.on_checkpoint || cfg_.checkpoint_every <= 0) return;
    const auto size = table_.size();
    if (size >= last_checkpoint_ + static_cast<std::size_t>(cfg_.checkpoint_every)) {
      last_checkpoint_ = size;
      hooks_.on_checkpoint(capture());
    }
  }

  bool run_serial() {
    while (work_left()) {
      if (stop_requested()) return true;
      WorkItem item = next_item();
      table_.add_pending(item);
      evaluate_and_record(item);
      maybe_checkpoint();
    }
    return false;
  }

  bool run_parallel() {
    WorkQueue<WorkItem> queue;
    std::mutex error_mu;
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> workers;
    for (int w = 0; w < cfg_.workers; ++w) {
      workers.emplace_back([&] {
        while (auto item = queue.pop()) {
          if (failed) continue;
          try {
            evaluate_and_record(*item);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
            failed = true;
            queue.close();
            table_.interrupt();
          }
        }
      });
    }
    bool stopped = false;
    while (work_left() && !failed) {
      if (stop_requested()) {
        stopped = true;
        break;
      }
      if (!in_init_phase()) {
        if (!table_.wait_for_size(1) || !queue.wait_idle()) break;
      }
      WorkItem item = next_item();
      table_.add_pending(item);
      queue.push(std::move(item));
      maybe_checkpoint();
    }
    queue.close();
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
    return stopped;
  }

  const SearchConfig& cfg_;
  const Evaluator& evaluator_;
  const SearchHooks& hooks_;
  std::size_t budget_;
  Rng rng_;
  IdCounter ids_;
  std::size_t dispatched_ = 0;
  std::deque<WorkItem> redispatch_;
  MemoryTable table_;
  std::size_t last_checkpoint_ = 0;
  double elapsed_offset_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

SearchResult run_search(SearchMode mode, const SearchConfig& cfg, const Evaluator& evaluator,
                        const SearchHooks& hooks, const SearchState* resume) {
  check_search_config(cfg);
  Engine engine(mode, cfg, evaluator, hooks, resume);
  return engine.run();
}

}  // namespace hiernas
