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

#ifndef HIERNAS_CORE_RUNNER_H_
#define HIERNAS_CORE_RUNNER_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "core/config.h"
#include "core/search.h"

namespace hiernas {

// Artifact file names inside a run directory.
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kRunLogFile = "run_log.csv";
inline constexpr const char* kBestGenotypeFile = "best_genotype.json";
inline constexpr const char* kCheckpointFile = "checkpoint.json";
inline constexpr const char* kDotDir = "dot";

inline constexpr const char* kCheckpointFormat = "hiernas-checkpoint";
inline constexpr int kCheckpointVersion = 1;

std::string csv_header();
std::string csv_row(const Individual& row);

struct Checkpoint {
  SearchMode mode = SearchMode::kEvolve;
  RunConfig config;
  SearchState state;
};

std::string checkpoint_to_text(SearchMode mode, const RunConfig& cfg, const SearchState& state);
// Throws IncompatibleCheckpoint for foreign or unreadable documents.
Checkpoint parse_checkpoint(std::string_view text);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct RunOutcome {
  SearchMode mode = SearchMode::kEvolve;
  RunConfig config;
  SearchResult result;
  bool already_complete = false;  // resume found nothing left to do
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // no artifacts when empty
  std::optional<std::size_t> stop_after;         // stop once this many records exist
};

// Runs a search and, with an out_dir, writes the config snapshot, run log
// (one flushed row per record), checkpoints, best genotype and its DOT bundle.
RunOutcome run_search_artifacts(SearchMode mode, const RunConfig& cfg, const RunOptions& opts);

// Continues a checkpointed run. `override_cfg` may change everything except
// the representation (IncompatibleCheckpoint otherwise). Without an out_dir
// the checkpoint's directory is used.
RunOutcome resume_run(const std::filesystem::path& checkpoint, const RunConfig* override_cfg,
                      const RunOptions& opts);

// Writes one DOT file per motif plus the cell; returns the file names.
std::vector<std::string> export_dot(const Genotype& g, const std::filesystem::path& dir);

// Human-readable validation, per-motif counts, flat graph size, cell
// parameters and node shapes for a height x width input.
std::string inspect_report(const Genotype& g, int height, int width);

Genotype load_genotype(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace hiernas

#endif  // HIERNAS_CORE_RUNNER_H_
