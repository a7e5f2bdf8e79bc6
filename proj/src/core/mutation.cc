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

#include "core/mutation.h"

namespace hiernas {

const char* edit_class_name(EditClass c) {
  switch (c) {
    case EditClass::kAddEdge: return "add";
    case EditClass::kAlterEdge: return "alter";
    case EditClass::kRemoveEdge: return "remove";
    case EditClass::kNoOp: return "noop";
  }
  return "?";
}

EditClass classify_edit(const MutationTrace& t) {
  if (t.new_op == t.old_op) return EditClass::kNoOp;
  if (t.old_op == 0) return EditClass::kAddEdge;
  if (t.new_op == 0) return EditClass::kRemoveEdge;
  return EditClass::kAlterEdge;
}

MutationTrace sample_mutation(const Genotype& g, Rng& rng) {
  const auto& spec = g.spec();
  MutationTrace t;
  t.level = spec.is_flat() ? 2 : uniform_int(rng, 2, spec.levels);
  t.motif = uniform_int(rng, 1, spec.motif_count(t.level));
  const int n = g.motif(t.level, t.motif).nodes();
  t.succ = uniform_int(rng, 2, n);
  t.pred = uniform_int(rng, 1, t.succ - 1);
  t.old_op = g.motif(t.level, t.motif).op(t.succ, t.pred);
  t.new_op = uniform_int(rng, 0, spec.pool_size(t.level) - 1);
  return t;
}

Genotype apply_mutation(const Genotype& g, const MutationTrace& t) {
  return g.with_edge(t.level, t.motif, t.succ, t.pred, t.new_op);
}

std::pair<Genotype, MutationTrace> mutate(const Genotype& g, Rng& rng, IdCounter& ids) {
  const auto trace = sample_mutation(g, rng);
  return {apply_mutation(g, trace).with_id(ids.next()), trace};
}

Genotype diversify(const Genotype& g, int n, Rng& rng, IdCounter& ids) {
  if (n <= 0) return g;
  // Mutate a private copy in place; the draws match n calls to mutate().
  Genotype::Levels motifs = g.motifs();
  for (int step = 0; step < n; ++step) {
    const auto& spec = g.spec();
    const int level = spec.is_flat() ? 2 : uniform_int(rng, 2, spec.levels);
    const int m = uniform_int(rng, 1, spec.motif_count(level));
    auto& motif = motifs[level - 2][m - 1];
    const int succ = uniform_int(rng, 2, motif.nodes());
    const int pred = uniform_int(rng, 1, succ - 1);
    motif.set_op(succ, pred, uniform_int(rng, 0, spec.pool_size(level) - 1));
  }
  return Genotype(g.spec(), std::move(motifs), ids.next());
}

}  // namespace hiernas
