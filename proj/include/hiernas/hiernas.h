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

// C interface to the hiernas architecture-search engine.
//
// Objects are opaque handles created by *_load / *_parse / *_decode style
// functions and released with the matching *_free. Every fallible call
// returns an hnas_status; on failure hnas_last_error() describes the most
// recent error on the calling thread. Strings returned through char** out
// parameters are owned by the caller and released with hnas_string_free.

#ifndef HIERNAS_HIERNAS_H_
#define HIERNAS_HIERNAS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(HIERNAS_BUILDING_LIBRARY)
#define HIERNAS_API __attribute__((visibility("default")))
#else
#define HIERNAS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hnas_status {
  HNAS_OK = 0,
  HNAS_ERR_INVALID_ARGUMENT = 1,
  HNAS_ERR_PARSE = 2,
  HNAS_ERR_INVALID_GENOTYPE = 3,
  HNAS_ERR_DEGENERATE = 4,
  HNAS_ERR_IO = 5,
  HNAS_ERR_INCOMPATIBLE_CHECKPOINT = 6,
  HNAS_ERR_NUMERIC = 7,
  HNAS_ERR_EVALUATION = 8,
  HNAS_ERR_SPATIAL_UNDERFLOW = 9,
  HNAS_ERR_INTERNAL = 10
} hnas_status;

typedef enum hnas_search_mode {
  HNAS_MODE_EVOLVE = 0,
  HNAS_MODE_RANDOM = 1
} hnas_search_mode;

typedef struct hnas_config hnas_config;
typedef struct hnas_genotype hnas_genotype;
typedef struct hnas_run hnas_run;

HIERNAS_API const char* hnas_version(void);
// Stable identifier such as "ParseError"; "Unknown" for unknown codes.
HIERNAS_API const char* hnas_status_name(hnas_status status);
// Message of the last failed call on this thread ("" if none). Valid until
// the next API call on the same thread.
HIERNAS_API const char* hnas_last_error(void);
HIERNAS_API void hnas_string_free(char* s);

// ---- configuration --------------------------------------------------------

HIERNAS_API hnas_status hnas_config_load(const char* path, hnas_config** out);
HIERNAS_API hnas_status hnas_config_parse(const char* text, hnas_config** out);
HIERNAS_API void hnas_config_free(hnas_config* cfg);

HIERNAS_API hnas_status hnas_config_set_seed(hnas_config* cfg, uint64_t seed);
HIERNAS_API hnas_status hnas_config_set_workers(hnas_config* cfg, int workers);
HIERNAS_API hnas_status hnas_config_set_total_steps(hnas_config* cfg, int steps);
HIERNAS_API hnas_status hnas_config_set_population(hnas_config* cfg, int population);
// Sets population size and total steps together; values <= 0 keep the
// current setting. Avoids transient total_steps < population states.
HIERNAS_API hnas_status hnas_config_set_budget(hnas_config* cfg, int population, int steps);
HIERNAS_API hnas_status hnas_config_set_eval_runs(hnas_config* cfg, int runs);
// "surrogate", "param", "param_reward" or "trainer".
HIERNAS_API hnas_status hnas_config_set_fitness(hnas_config* cfg, const char* backend);
// 0 removes the threshold.
HIERNAS_API hnas_status hnas_config_set_param_threshold(hnas_config* cfg, uint64_t threshold);
// Resolved document with every default filled in.
HIERNAS_API hnas_status hnas_config_to_text(const hnas_config* cfg, char** out);

// ---- genotypes -------------------------------------------------------------

HIERNAS_API hnas_status hnas_genotype_decode(const char* text, hnas_genotype** out);
HIERNAS_API hnas_status hnas_genotype_load(const char* path, hnas_genotype** out);
// Identity-chain genotype of the config's representation.
HIERNAS_API hnas_status hnas_genotype_trivial(const hnas_config* cfg, hnas_genotype** out);
HIERNAS_API void hnas_genotype_free(hnas_genotype* g);

HIERNAS_API hnas_status hnas_genotype_encode(const hnas_genotype* g, char** out);
// *ok is 1 when valid; *report lists violations one per line (may be NULL).
HIERNAS_API hnas_status hnas_genotype_validate(const hnas_genotype* g, int* ok, char** report);
// n random mutations driven by `seed`.
HIERNAS_API hnas_status hnas_genotype_diversify(const hnas_genotype* g, int n, uint64_t seed,
                                                hnas_genotype** out);
HIERNAS_API hnas_status hnas_genotype_to_dot(const hnas_genotype* g, char** out);
// One .dot file per motif plus cell.dot; *graphs receives the file count.
HIERNAS_API hnas_status hnas_genotype_export_dot(const hnas_genotype* g, const char* dir,
                                                 int* graphs);
HIERNAS_API hnas_status hnas_genotype_inspect(const hnas_genotype* g, int height, int width,
                                              char** out);
// Flattened cell size and its parameter count at the genotype's channel count.
HIERNAS_API hnas_status hnas_genotype_flat_summary(const hnas_genotype* g, size_t* nodes,
                                                   size_t* edges, uint64_t* params);

// ---- evaluation and search -----------------------------------------------

// Scores one genotype with the configured backend, averaged over eval_runs.
HIERNAS_API hnas_status hnas_evaluate(const hnas_config* cfg, const hnas_genotype* g,
                                      double* fitness, uint64_t* params);

// Runs a search. With a non-NULL out_dir the run writes config.json,
// run_log.csv, checkpoint.json, best_genotype.json and dot/. stop_after > 0
// ends the run once that many records exist (it can be resumed later).
HIERNAS_API hnas_status hnas_search(const hnas_config* cfg, hnas_search_mode mode,
                                    const char* out_dir, uint64_t stop_after, hnas_run** out);
// Continues a checkpoint. cfg may be NULL (use the checkpoint's config);
// out_dir NULL writes next to the checkpoint.
HIERNAS_API hnas_status hnas_resume(const char* checkpoint, const hnas_config* cfg,
                                    const char* out_dir, hnas_run** out);
HIERNAS_API void hnas_run_free(hnas_run* run);

HIERNAS_API size_t hnas_run_table_size(const hnas_run* run);
HIERNAS_API int hnas_run_completed(const hnas_run* run);
// 1 when resume found the run already finished and did nothing.
HIERNAS_API int hnas_run_already_complete(const hnas_run* run);
HIERNAS_API double hnas_run_best_fitness(const hnas_run* run);
HIERNAS_API uint64_t hnas_run_best_id(const hnas_run* run);
HIERNAS_API uint64_t hnas_run_best_param_count(const hnas_run* run);
HIERNAS_API hnas_status hnas_run_best_genotype(const hnas_run* run, hnas_genotype** out);
// Deterministic dump of the memory table; wall times only if include_timing.
HIERNAS_API hnas_status hnas_run_table_text(const hnas_run* run, int include_timing, char** out);

#ifdef __cplusplus
}  // extern "C"
#endif

#endif  // HIERNAS_HIERNAS_H_
