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

#include "hiernas/hiernas.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>

#include "core/config.h"
#include "core/fitness.h"
#include "core/mutation.h"
#include "core/runner.h"

struct hnas_config {
  hiernas::RunConfig value;
};

struct hnas_genotype {
  hiernas::Genotype value;
};

struct hnas_run {
  hiernas::RunOutcome value;
};

namespace {

thread_local std::string last_error;

hnas_status status_of(hiernas::ErrorCode code) {
  using hiernas::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return HNAS_ERR_INVALID_ARGUMENT;
    case ErrorCode::kParse: return HNAS_ERR_PARSE;
    case ErrorCode::kInvalidGenotype: return HNAS_ERR_INVALID_GENOTYPE;
    case ErrorCode::kDegenerateArchitecture: return HNAS_ERR_DEGENERATE;
    case ErrorCode::kEvaluationFailure: return HNAS_ERR_EVALUATION;
    case ErrorCode::kNumericFailure: return HNAS_ERR_NUMERIC;
    case ErrorCode::kSpatialUnderflow: return HNAS_ERR_SPATIAL_UNDERFLOW;
    case ErrorCode::kIncompatibleCheckpoint: return HNAS_ERR_INCOMPATIBLE_CHECKPOINT;
    case ErrorCode::kIo: return HNAS_ERR_IO;
  }
  return HNAS_ERR_INTERNAL;
}

hnas_status fail(hnas_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
hnas_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return HNAS_OK;
  } catch (const hiernas::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::invalid_argument& e) {
    return fail(HNAS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(HNAS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HNAS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HNAS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HNAS_ERR_INTERNAL, "unknown failure");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

// Applies `edit` to a copy of the config and keeps it only if still valid.
template <class F>
hnas_status edit_config(hnas_config* cfg, F&& edit) {
  return guarded([&] {
    require(cfg != nullptr, "config is NULL");
    hiernas::RunConfig next = cfg->value;
    edit(next);
    hiernas::check_run_config(next);
    cfg->value = std::move(next);
  });
}

}  // namespace

extern "C" {

const char* hnas_version(void) { return "1.0.0"; }

const char* hnas_status_name(hnas_status status) {
  switch (status) {
    case HNAS_OK: return "Ok";
    case HNAS_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case HNAS_ERR_PARSE: return "ParseError";
    case HNAS_ERR_INVALID_GENOTYPE: return "InvalidGenotype";
    case HNAS_ERR_DEGENERATE: return "DegenerateArchitecture";
    case HNAS_ERR_IO: return "IoError";
    case HNAS_ERR_INCOMPATIBLE_CHECKPOINT: return "IncompatibleCheckpoint";
    case HNAS_ERR_NUMERIC: return "NumericFailure";
    case HNAS_ERR_EVALUATION: return "EvaluationFailure";
    case HNAS_ERR_SPATIAL_UNDERFLOW: return "SpatialUnderflow";
    case HNAS_ERR_INTERNAL: return "InternalError";
  }
  return "Unknown";
}

const char* hnas_last_error(void) { return last_error.c_str(); }

void hnas_string_free(char* s) { std::free(s); }

// ---- configuration ----------------------------------------------------------

hnas_status hnas_config_load(const char* path, hnas_config** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-NULL");
    *out = new hnas_config{hiernas::load_config(path)};
  });
}

hnas_status hnas_config_parse(const char* text, hnas_config** out) {
  return guarded([&] {
    require(text && out, "text and out must be non-NULL");
    *out = new hnas_config{hiernas::parse_config(text)};
  });
}

void hnas_config_free(hnas_config* cfg) { delete cfg; }

hnas_status hnas_config_set_seed(hnas_config* cfg, uint64_t seed) {
  return edit_config(cfg, [&](hiernas::RunConfig& c) { c.search.seed = seed; });
}

hnas_status hnas_config_set_workers(hnas_config* cfg, int workers) {
  return edit_config(cfg, [&](hiernas::RunConfig& c) { c.search.workers = workers; });
}

hnas_status hnas_config_set_total_steps(hnas_config* cfg, int steps) {
  return edit_config(cfg, [&](hiernas::RunConfig& c) { c.search.total_steps = steps; });
}

hnas_status hnas_config_set_population(hnas_config* cfg, int population) {
  return edit_config(cfg, [&](hiernas::RunConfig& c) { c.search.population_size = population; });
}

hnas_status hnas_config_set_budget(hnas_config* cfg, int population, int steps) {
  return edit_config(cfg, [&](hiernas::RunConfig& c) {
    if (population > 0) c.search.population_size = population;
    if (steps > 0) c.search.total_steps = steps;
  });
}

hnas_status hnas_config_set_eval_runs(hnas_config* cfg, int runs) {
  return edit_config(cfg, [&](hiernas::RunConfig& c) { c.search.eval_runs = runs; });
}

hnas_status hnas_config_set_fitness(hnas_config* cfg, const char* backend) {
  return edit_config(cfg, [&](hiernas::RunConfig& c) {
    require(backend != nullptr, "backend is NULL");
    c.search.fitness_backend = backend;
  });
}

hnas_status hnas_config_set_param_threshold(hnas_config* cfg, uint64_t threshold) {
  return edit_config(cfg, [&](hiernas::RunConfig& c) {
    if (threshold == 0) {
      c.search.param_threshold.reset();
    } else {
      c.search.param_threshold = threshold;
    }
  });
}

hnas_status hnas_config_to_text(const hnas_config* cfg, char** out) {
  return guarded([&] {
    require(cfg && out, "cfg and out must be non-NULL");
    *out = copy_string(hiernas::config_to_text(cfg->value));
  });
}

// ---- genotypes ---------------------------------------------------------------

hnas_status hnas_genotype_decode(const char* text, hnas_genotype** out) {
  return guarded([&] {
    require(text && out, "text and out must be non-NULL");
    *out = new hnas_genotype{hiernas::decode(text)};
  });
}

hnas_status hnas_genotype_load(const char* path, hnas_genotype** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-NULL");
    *out = new hnas_genotype{hiernas::load_genotype(path)};
  });
}

hnas_status hnas_genotype_trivial(const hnas_config* cfg, hnas_genotype** out) {
  return guarded([&] {
    require(cfg && out, "cfg and out must be non-NULL");
    *out = new hnas_genotype{hiernas::trivial_genotype(cfg->value.search.representation)};
  });
}

void hnas_genotype_free(hnas_genotype* g) { delete g; }

hnas_status hnas_genotype_encode(const hnas_genotype* g, char** out) {
  return guarded([&] {
    require(g && out, "g and out must be non-NULL");
    *out = copy_string(hiernas::encode(g->value));
  });
}

hnas_status hnas_genotype_validate(const hnas_genotype* g, int* ok, char** report) {
  return guarded([&] {
    require(g && ok, "g and ok must be non-NULL");
    const auto r = hiernas::validate(g->value);
    *ok = r.ok() ? 1 : 0;
    if (report) {
      std::string text;
      for (const auto& v : r.violations) text += v.to_string() + "\n";
      *report = copy_string(text);
    }
  });
}

hnas_status hnas_genotype_diversify(const hnas_genotype* g, int n, uint64_t seed,
                                    hnas_genotype** out) {
  return guarded([&] {
    require(g && out, "g and out must be non-NULL");
    require(n >= 0, "mutation count must be >= 0");
    if (auto r = hiernas::validate(g->value); !r.ok()) throw hiernas::InvalidGenotype(r.violations);
    hiernas::Rng rng(seed);
    *out = new hnas_genotype{hiernas::diversify(g->value, n, rng)};
  });
}

hnas_status hnas_genotype_to_dot(const hnas_genotype* g, char** out) {
  return guarded([&] {
    require(g && out, "g and out must be non-NULL");
    if (auto r = hiernas::validate(g->value); !r.ok()) throw hiernas::InvalidGenotype(r.violations);
    *out = copy_string(hiernas::to_dot(g->value));
  });
}

hnas_status hnas_genotype_export_dot(const hnas_genotype* g, const char* dir, int* graphs) {
  return guarded([&] {
    require(g && dir, "g and dir must be non-NULL");
    const auto names = hiernas::export_dot(g->value, dir);
    if (graphs) *graphs = static_cast<int>(names.size());
  });
}

hnas_status hnas_genotype_inspect(const hnas_genotype* g, int height, int width, char** out) {
  return guarded([&] {
    require(g && out, "g and out must be non-NULL");
    require(height >= 1 && width >= 1, "height and width must be >= 1");
    *out = copy_string(hiernas::inspect_report(g->value, height, width));
  });
}

hnas_status hnas_genotype_flat_summary(const hnas_genotype* g, size_t* nodes, size_t* edges,
                                       uint64_t* params) {
  return guarded([&] {
    require(g != nullptr, "g is NULL");
    if (auto r = hiernas::validate(g->value); !r.ok()) throw hiernas::InvalidGenotype(r.violations);
    const auto flat = hiernas::flatten(g->value);
    if (nodes) *nodes = flat.node_count();
    if (edges) *edges = flat.edges.size();
    if (params) *params = hiernas::cell_parameters(flat, g->value.spec().channels);
  });
}

// ---- evaluation and search -----------------------------------------------

hnas_status hnas_evaluate(const hnas_config* cfg, const hnas_genotype* g, double* fitness,
                          uint64_t* params) {
  return guarded([&] {
    require(cfg && g, "cfg and g must be non-NULL");
    if (auto r = hiernas::validate(g->value); !r.ok()) throw hiernas::InvalidGenotype(r.violations);
    if (!(g->value.spec() == cfg->value.search.representation)) {
      throw std::invalid_argument("genotype does not match the config representation");
    }
    const auto evaluator = hiernas::make_evaluator(cfg->value);
    const auto& s = cfg->value.search;
    const auto e = hiernas::evaluate_averaged(
        *evaluator, g->value, s.eval_runs,
        hiernas::derive_seed(s.seed, hiernas::Stream::kEvaluation, g->value.id().value));
    if (fitness) *fitness = e.fitness;
    if (params) *params = e.param_count;
  });
}

hnas_status hnas_search(const hnas_config* cfg, hnas_search_mode mode, const char* out_dir,
                        uint64_t stop_after, hnas_run** out) {
  return guarded([&] {
    require(cfg && out, "cfg and out must be non-NULL");
    require(mode == HNAS_MODE_EVOLVE || mode == HNAS_MODE_RANDOM, "unknown search mode");
    hiernas::RunOptions opts;
    if (out_dir) opts.out_dir = out_dir;
    if (stop_after > 0) opts.stop_after = stop_after;
    const auto m = mode == HNAS_MODE_EVOLVE ? hiernas::SearchMode::kEvolve
                                            : hiernas::SearchMode::kRandom;
    *out = new hnas_run{hiernas::run_search_artifacts(m, cfg->value, opts)};
  });
}

hnas_status hnas_resume(const char* checkpoint, const hnas_config* cfg, const char* out_dir,
                        hnas_run** out) {
  return guarded([&] {
    require(checkpoint && out, "checkpoint and out must be non-NULL");
    hiernas::RunOptions opts;
    if (out_dir) opts.out_dir = out_dir;
    *out = new hnas_run{hiernas::resume_run(checkpoint, cfg ? &cfg->value : nullptr, opts)};
  });
}

void hnas_run_free(hnas_run* run) { delete run; }

size_t hnas_run_table_size(const hnas_run* run) {
  return run ? run->value.result.rows.size() : 0;
}

int hnas_run_completed(const hnas_run* run) {
  return run && run->value.result.completed ? 1 : 0;
}

int hnas_run_already_complete(const hnas_run* run) {
  return run && run->value.already_complete ? 1 : 0;
}

double hnas_run_best_fitness(const hnas_run* run) {
  return run && run->value.result.best ? run->value.result.best->record.fitness : 0.0;
}

uint64_t hnas_run_best_id(const hnas_run* run) {
  return run && run->value.result.best ? run->value.result.best->record.id.value : 0;
}

uint64_t hnas_run_best_param_count(const hnas_run* run) {
  return run && run->value.result.best ? run->value.result.best->record.param_count : 0;
}

hnas_status hnas_run_best_genotype(const hnas_run* run, hnas_genotype** out) {
  return guarded([&] {
    require(run && out, "run and out must be non-NULL");
    require(run->value.result.best != nullptr, "run has no records");
    *out = new hnas_genotype{run->value.result.best->genotype};
  });
}

hnas_status hnas_run_table_text(const hnas_run* run, int include_timing, char** out) {
  return guarded([&] {
    require(run && out, "run and out must be non-NULL");
    *out = copy_string(hiernas::canonical_text(run->value.result.rows, include_timing != 0));
  });
}

}  // extern "C"
