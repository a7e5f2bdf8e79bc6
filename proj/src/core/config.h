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

#ifndef HIERNAS_CORE_CONFIG_H_
#define HIERNAS_CORE_CONFIG_H_

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "core/fitness.h"
#include "core/search.h"

namespace hiernas {

// Backends: "surrogate", "param" (surrogate under a parameter threshold),
// "param_reward" (surrogate plus a reward on parameter count), "trainer".
// A param_threshold on any backend wraps it with the constraint.
struct RunConfig {
  SearchConfig search;
  TrainerConfig trainer;
};

// JSON document with sections "representation", "search", "fitness" (with
// an optional "trainer" object). Missing keys take defaults; unknown keys and
// wrong types are ParseErrors.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Fully resolved document (every key present), deterministic.
std::string config_to_text(const RunConfig& cfg);

bool is_known_backend(std::string_view name);

// Throws std::invalid_argument for inconsistent settings.
void check_run_config(const RunConfig& cfg);

std::shared_ptr<const Evaluator> make_evaluator(const RunConfig& cfg);

}  // namespace hiernas

#endif  // HIERNAS_CORE_CONFIG_H_
