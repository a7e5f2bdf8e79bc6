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

#ifndef HIERNAS_CORE_MUTATION_H_
#define HIERNAS_CORE_MUTATION_H_

#include <utility>

#include "core/genotype.h"
#include "core/rng.h"

namespace hiernas {

// The cell [G^(level)_motif](succ, pred) changed from old_op to new_op.
struct MutationTrace {
  int level = 2;
  int motif = 1;
  int succ = 2;
  int pred = 1;
  int old_op = 0;
  int new_op = 0;
  bool operator==(const MutationTrace&) const = default;
};

enum class EditClass { kAddEdge, kAlterEdge, kRemoveEdge, kNoOp };

const char* edit_class_name(EditClass c);

EditClass classify_edit(const MutationTrace& t);

// Draws, in order: level (skipped for flat genotypes), motif, successor,
// predecessor, replacement op. Each choice is uniform over its domain; the
// replacement ranges over the whole pool, so it may equal the current op.
MutationTrace sample_mutation(const Genotype& g, Rng& rng);

// Applies a trace to `g`. The result keeps g's id.
Genotype apply_mutation(const Genotype& g, const MutationTrace& t);

// Returns the mutated genotype (new id from `ids`) and its trace. `g` must validate.
std::pair<Genotype, MutationTrace> mutate(const Genotype& g, Rng& rng,
                                          IdCounter& ids = default_ids());

// n sequential mutations. n = 0 returns g unchanged.
Genotype diversify(const Genotype& g, int n, Rng& rng, IdCounter& ids = default_ids());

}  // namespace hiernas

#endif  // HIERNAS_CORE_MUTATION_H_
