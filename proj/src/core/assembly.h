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

#ifndef HIERNAS_CORE_ASSEMBLY_H_
#define HIERNAS_CORE_ASSEMBLY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/genotype.h"

namespace hiernas {

// One inlining step: the edge (pred -> succ) of motif `motif` at `level` was
// replaced by a copy of a level-(level - 1) motif.
struct ExpansionStep {
  int level = 0;
  int motif = 0;
  int succ = 0;
  int pred = 0;
  bool operator==(const ExpansionStep&) const = default;
};

struct Provenance {
  std::vector<ExpansionStep> path;  // outermost first; empty for the cell
  // Node: index within the innermost motif copy. Edge: its (succ, pred).
  int local = 0;
  int local_pred = 0;
  // Set on the 1x1 convolution appended after an inlined level-2 motif.
  bool trailing = false;
};

struct FlatNode {
  int id = 0;
  Provenance provenance;
};

struct FlatEdge {
  int src = 0;
  int dst = 0;
  PrimitiveOp op = PrimitiveOp::kIdentity;
  // When set, the edge outputs as many channels as node `width_of` holds
  // instead of the fixed C (trailing convolutions restore the motif input width).
  std::optional<int> width_of;
  Provenance provenance;
};

// Single-source, single-sink DAG of primitive operations. Node ids are
// 0..n-1 in topological order; edges are sorted by (dst, src).
struct FlatArchitecture {
  std::vector<FlatNode> nodes;
  std::vector<FlatEdge> edges;
  int source = 0;
  int sink = 0;

  std::size_t node_count() const { return nodes.size(); }
};

// Throws InvalidGenotype when `g` does not validate and DegenerateArchitecture
// when no source-to-sink path survives.
FlatArchitecture flatten(const Genotype& g);

struct TensorShape {
  std::int64_t batch = 1;
  std::int64_t channels = 1;
  std::int64_t height = 1;
  std::int64_t width = 1;
  bool operator==(const TensorShape&) const = default;
};

std::string to_string(const TensorShape& s);

// Output channels of `edge` given its source width and the fixed width C.
std::int64_t edge_output_channels(const FlatEdge& edge, std::int64_t src_channels,
                                  std::int64_t fixed_channels,
                                  const std::vector<TensorShape>& shapes);

// Per-node feature-map shapes, indexed by node id.
std::vector<TensorShape> infer_shapes(const FlatArchitecture& a, const TensorShape& input,
                                      std::int64_t fixed_channels);

// Learnable parameters of one edge: convolutions are bias-free and carry a
// per-channel normalization scale and shift.
std::uint64_t edge_parameters(PrimitiveOp op, std::int64_t in_channels,
                              std::int64_t out_channels);

std::uint64_t count_parameters(const FlatArchitecture& a, const TensorShape& input,
                               std::int64_t fixed_channels);

// Longest source-to-sink path, in edges.
int longest_path(const FlatArchitecture& a);

// DOT rendering. For a genotype: one digraph per motif below the top level
// ("Motif m" at level 2) followed by the cell; edge labels are operation
// names or motif references.
struct DotGraph {
  std::string name;      // e.g. "Motif 3", "Cell"
  std::string filename;  // e.g. "motif_3.dot", "cell.dot"
  std::string text;
};

std::vector<DotGraph> to_dot_graphs(const Genotype& g);
std::string to_dot(const Genotype& g);
std::string to_dot(const FlatArchitecture& a);

}  // namespace hiernas

#endif  // HIERNAS_CORE_ASSEMBLY_H_
