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

#include "core/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace hiernas {
namespace {

using nlohmann::json;

constexpr const char* kBackends[] = {"surrogate", "param", "param_reward", "trainer"};

// Reads keys out of one JSON object, rejecting any it was not asked about.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ParseError(fmt::format("{} must be an object", path_));
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end() || it->is_null()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ParseError(fmt::format("{}.{} has the wrong type", path_, key));
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return (it == doc_.end() || it->is_null()) ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw ParseError(fmt::format("unknown key {}.{}", path_, key));
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_representation(const json& doc, HierarchySpec& spec) {
  Section s(doc, "representation");
  s.read("levels", spec.levels);
  s.read("channels", spec.channels);
  s.read("motif_counts", spec.motif_counts);
  s.read("node_counts", spec.node_counts);
  s.finish();
}

void read_search(const json& doc, SearchConfig& c) {
  Section s(doc, "search");
  s.read("population_size", c.population_size);
  s.read("total_steps", c.total_steps);
  s.read("tournament_fraction", c.tournament_fraction);
  s.read("init_mutations", c.init_mutations);
  s.read("workers", c.workers);
  s.read("seed", c.seed);
  s.read("eval_runs", c.eval_runs);
  s.read("checkpoint_every", c.checkpoint_every);
  s.finish();
}

void read_trainer(const json& doc, TrainerConfig& t) {
  Section s(doc, "fitness.trainer");
  s.read("stem_channels", t.stem_channels);
  s.read("cells_per_group", t.cells_per_group);
  s.read("groups", t.groups);
  s.read("classes", t.classes);
  s.read("image_size", t.image_size);
  s.read("per_class", t.per_class);
  s.read("dataset_seed", t.dataset_seed);
  s.read("steps", t.settings.steps);
  s.read("batch", t.settings.batch);
  s.read("schedule", t.settings.schedule);
  s.read("momentum", t.settings.momentum);
  s.read("weight_decay", t.settings.weight_decay);
  s.finish();
}

void read_fitness(const json& doc, RunConfig& cfg) {
  Section s(doc, "fitness");
  s.read("backend", cfg.search.fitness_backend);
  std::uint64_t threshold = 0;
  s.read("param_threshold", threshold);
  if (threshold > 0) cfg.search.param_threshold = threshold;
  if (const json* t = s.child("trainer")) read_trainer(*t, cfg.trainer);
  s.finish();
}

}  // namespace

bool is_known_backend(std::string_view name) {
  for (const char* b : kBackends) {
    if (name == b) return true;
  }
  return false;
}

void check_run_config(const RunConfig& cfg) {
  check_search_config(cfg.search);
  const auto& backend = cfg.search.fitness_backend;
  if (!is_known_backend(backend)) {
    throw std::invalid_argument(fmt::format(
        "unknown fitness backend '{}' (expected surrogate, param, param_reward or trainer)", backend));
  }
  if (backend == "param" && !cfg.search.param_threshold) {
    throw std::invalid_argument("fitness backend 'param' needs param_threshold");
  }
  if (backend == "trainer") check_trainer_config(cfg.trainer);
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  RunConfig cfg;
  Section root(doc, "config");
  if (const json* r = root.child("representation")) read_representation(*r, cfg.search.representation);
  if (const json* s = root.child("search")) read_search(*s, cfg.search);
  if (const json* f = root.child("fitness")) read_fitness(*f, cfg);
  root.finish();
  try {
    check_run_config(cfg);
  } catch (const std::invalid_argument& e) {
    throw ParseError(fmt::format("config: {}", e.what()));
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot read config {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string config_to_text(const RunConfig& cfg) {
  const auto& s = cfg.search;
  const auto& t = cfg.trainer;
  json doc;
  doc["representation"] = {
      {"levels", s.representation.levels},
      {"channels", s.representation.channels},
      {"motif_counts", s.representation.motif_counts},
      {"node_counts", s.representation.node_counts},
  };
  doc["search"] = {
      {"population_size", s.population_size},
      {"total_steps", s.total_steps},
      {"tournament_fraction", s.tournament_fraction},
      {"init_mutations", s.init_mutations},
      {"workers", s.workers},
      {"seed", s.seed},
      {"eval_runs", s.eval_runs},
      {"checkpoint_every", s.checkpoint_every},
  };
  doc["fitness"] = {
      {"backend", s.fitness_backend},
      {"param_threshold", s.param_threshold ? json(*s.param_threshold) : json(nullptr)},
      {"trainer",
       {
           {"stem_channels", t.stem_channels},
           {"cells_per_group", t.cells_per_group},
           {"groups", t.groups},
           {"classes", t.classes},
           {"image_size", t.image_size},
           {"per_class", t.per_class},
           {"dataset_seed", t.dataset_seed},
           {"steps", t.settings.steps},
           {"batch", t.settings.batch},
           {"schedule", t.settings.schedule},
           {"momentum", t.settings.momentum},
           {"weight_decay", t.settings.weight_decay},
       }},
  };
  return doc.dump(2) + "\n";
}

std::shared_ptr<const Evaluator> make_evaluator(const RunConfig& cfg) {
  check_run_config(cfg);
  const auto& backend = cfg.search.fitness_backend;
  std::shared_ptr<const Evaluator> base;
  if (backend == "trainer") {
    base = std::make_shared<TrainerEvaluator>(cfg.trainer);
  } else if (backend == "param_reward") {
    base = std::make_shared<ParamRewardEvaluator>();
  } else {
    base = std::make_shared<SurrogateEvaluator>();
  }
  if (cfg.search.param_threshold) return constrain(base, *cfg.search.param_threshold);
  return base;
}

}  // namespace hiernas
