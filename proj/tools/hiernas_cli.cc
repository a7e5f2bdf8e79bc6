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

// Command-line front end. Talks to the engine only through the C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hiernas/hiernas.h"

namespace {

// Raised when an API call fails; carries the status for the error line.
struct ApiFailure {
  hnas_status status;
  std::string message;
};

void check(hnas_status status) {
  if (status != HNAS_OK) throw ApiFailure{status, hnas_last_error()};
}

struct ConfigDeleter {
  void operator()(hnas_config* c) const { hnas_config_free(c); }
};
struct GenotypeDeleter {
  void operator()(hnas_genotype* g) const { hnas_genotype_free(g); }
};
struct RunDeleter {
  void operator()(hnas_run* r) const { hnas_run_free(r); }
};
using ConfigPtr = std::unique_ptr<hnas_config, ConfigDeleter>;
using GenotypePtr = std::unique_ptr<hnas_genotype, GenotypeDeleter>;
using RunPtr = std::unique_ptr<hnas_run, RunDeleter>;

std::string take(char* s) {
  std::string out = s ? s : "";
  hnas_string_free(s);
  return out;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<int> steps;
  std::optional<int> population;
  std::optional<std::string> fitness;
  std::optional<std::uint64_t> param_threshold;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--workers", workers, "Worker threads (1 = deterministic serial loop)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--steps", steps, "Total evaluated genotypes, initial population included")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--population", population, "Initial population size")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--fitness", fitness, "Fitness backend")
        ->check(CLI::IsMember({"surrogate", "param", "param_reward", "trainer"}));
    cmd->add_option("--param-threshold", param_threshold,
                    "Cell parameter limit; larger cells score 0");
  }

  void apply(hnas_config* cfg) const {
    if (seed) check(hnas_config_set_seed(cfg, *seed));
    if (workers) check(hnas_config_set_workers(cfg, *workers));
    if (population || steps) {
      check(hnas_config_set_budget(cfg, population.value_or(0), steps.value_or(0)));
    }
    if (param_threshold) check(hnas_config_set_param_threshold(cfg, *param_threshold));
    if (fitness) check(hnas_config_set_fitness(cfg, fitness->c_str()));
  }
};

ConfigPtr load_config(const std::string& path) {
  hnas_config* cfg = nullptr;
  check(hnas_config_load(path.c_str(), &cfg));
  return ConfigPtr(cfg);
}

GenotypePtr load_genotype(const std::string& path) {
  hnas_genotype* g = nullptr;
  check(hnas_genotype_load(path.c_str(), &g));
  return GenotypePtr(g);
}

void print_run(const hnas_run* run, const std::string& out_dir) {
  nlohmann::json summary{
      {"records", hnas_run_table_size(run)},
      {"completed", hnas_run_completed(run) != 0},
      {"best_id", hnas_run_best_id(run)},
      {"best_fitness", hnas_run_best_fitness(run)},
      {"best_param_count", hnas_run_best_param_count(run)},
      {"out", out_dir},
  };
  if (hnas_run_already_complete(run)) summary["already_complete"] = true;
  std::cout << summary.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical architecture search"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hnas_version()));

  std::string config_path;
  std::string out_dir = "hiernas_run";
  std::uint64_t stop_after = 0;
  Overrides overrides;

  auto add_search = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("-c,--config", config_path, "Config document")->required();
    cmd->add_option("--out", out_dir, "Artifact directory")->capture_default_str();
    cmd->add_option("--stop-after", stop_after,
                    "Stop once this many records exist (resume continues the run)");
    overrides.add_to(cmd);
    return cmd;
  };
  auto* evolve_cmd = add_search("search-evolve", "Asynchronous evolutionary search");
  auto* random_cmd = add_search("search-random", "Random search over the initial population");

  std::string checkpoint_path;
  std::optional<std::string> resume_out;
  std::optional<std::string> resume_config;
  auto* resume_cmd = app.add_subcommand("resume", "Continue a run from its checkpoint");
  resume_cmd->add_option("checkpoint", checkpoint_path, "checkpoint.json")->required();
  resume_cmd->add_option("-c,--config", resume_config,
                         "Replacement config (representation must match)");
  resume_cmd->add_option("--out", resume_out, "Artifact directory (default: checkpoint's)");

  std::string genotype_path;
  auto* eval_cmd = app.add_subcommand("eval", "Score a genotype document");
  eval_cmd->add_option("-c,--config", config_path, "Config document")->required();
  eval_cmd->add_option("genotype", genotype_path, "Genotype document")->required();
  overrides.add_to(eval_cmd);

  std::string dot_dir = "dot";
  auto* dot_cmd = app.add_subcommand("export-dot", "Write one DOT graph per motif plus the cell");
  dot_cmd->add_option("genotype", genotype_path, "Genotype document")->required();
  dot_cmd->add_option("--out", dot_dir, "Output directory")->capture_default_str();

  int height = 8;
  int width = 8;
  auto* inspect_cmd = app.add_subcommand("inspect", "Validate and describe a genotype");
  inspect_cmd->add_option("genotype", genotype_path, "Genotype document")->required();
  inspect_cmd->add_option("--height", height, "Input height")->check(CLI::PositiveNumber);
  inspect_cmd->add_option("--width", width, "Input width")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (evolve_cmd->parsed() || random_cmd->parsed()) {
      auto cfg = load_config(config_path);
      overrides.apply(cfg.get());
      hnas_run* run = nullptr;
      check(hnas_search(cfg.get(), evolve_cmd->parsed() ? HNAS_MODE_EVOLVE : HNAS_MODE_RANDOM,
                        out_dir.c_str(), stop_after, &run));
      RunPtr owned(run);
      print_run(run, out_dir);
    } else if (resume_cmd->parsed()) {
      ConfigPtr cfg;
      if (resume_config) cfg = load_config(*resume_config);
      hnas_run* run = nullptr;
      check(hnas_resume(checkpoint_path.c_str(), cfg.get(),
                        resume_out ? resume_out->c_str() : nullptr, &run));
      RunPtr owned(run);
      std::string dir = std::filesystem::path(checkpoint_path).parent_path().string();
      print_run(run, resume_out.value_or(dir.empty() ? "." : dir));
    } else if (eval_cmd->parsed()) {
      auto cfg = load_config(config_path);
      overrides.apply(cfg.get());
      auto g = load_genotype(genotype_path);
      double fitness = 0.0;
      std::uint64_t params = 0;
      check(hnas_evaluate(cfg.get(), g.get(), &fitness, &params));
      std::cout << nlohmann::json{{"fitness", fitness}, {"param_count", params}}.dump() << "\n";
    } else if (dot_cmd->parsed()) {
      auto g = load_genotype(genotype_path);
      int graphs = 0;
      check(hnas_genotype_export_dot(g.get(), dot_dir.c_str(), &graphs));
      std::cout << nlohmann::json{{"graphs", graphs}, {"out", dot_dir}}.dump() << "\n";
    } else if (inspect_cmd->parsed()) {
      auto g = load_genotype(genotype_path);
      char* report = nullptr;
      check(hnas_genotype_inspect(g.get(), height, width, &report));
      std::cout << take(report);
    }
  } catch (const ApiFailure& e) {
    std::cerr << nlohmann::json{{"error", hnas_status_name(e.status)}, {"message", e.message}}.dump()
              << "\n";
    return 2;
  }
  return 0;
}
