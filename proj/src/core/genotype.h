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

#ifndef HIERNAS_CORE_GENOTYPE_H_
#define HIERNAS_CORE_GENOTYPE_H_

#include <atomic>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/errors.h"

namespace hiernas {

// Level-1 operations. The integer values are the serialized encoding.
enum class PrimitiveOp : int {
  kNone = 0,
  kIdentity = 1,
  kConv1x1 = 2,
  kDepthwiseConv3x3 = 3,
  kSeparableConv3x3 = 4,
  kMaxPool3x3 = 5,
  kAvgPool3x3 = 6,
};

inline constexpr int kNumPrimitives = 6;

// Short identifier, e.g. "sep_conv_3x3".
const char* primitive_name(PrimitiveOp op);
// Visualization label, e.g. "3 × 3 separable".
const char* primitive_label(PrimitiveOp op);

struct GenotypeId {
  std::uint64_t value = 0;
  auto operator<=>(const GenotypeId&) const = default;
};

// Monotone id source. One per search run; default_ids() serves ad-hoc use.
class IdCounter {
 public:
  explicit IdCounter(std::uint64_t next = 1) : next_(next) {}
  GenotypeId next() { return GenotypeId{next_.fetch_add(1)}; }
  std::uint64_t peek() const { return next_.load(); }
  void reset(std::uint64_t next) { next_.store(next); }

 private:
  std::atomic<std::uint64_t> next_;
};

IdCounter& default_ids();

// Directed acyclic graph over nodes 1..n. The edge (pred -> succ) carries an
// index into the operation pool of the level below, 0 meaning no edge. Only
// pred < succ is storable, so every representable motif is acyclic.
class MotifGraph {
 public:
  MotifGraph() = default;
  explicit MotifGraph(int nodes);

  int nodes() const { return nodes_; }
  int op(int succ, int pred) const { return ops_[slot(succ, pred)]; }
  void set_op(int succ, int pred, int k) { ops_[slot(succ, pred)] = k; }
  // Number of edges whose op is not none.
  int edge_count() const;

  bool operator==(const MotifGraph&) const = default;

 private:
  std::size_t slot(int succ, int pred) const;

  int nodes_ = 0;
  std::vector<int> ops_;  // lower triangle, row succ = 2..n
};

struct HierarchySpec {
  int levels = 2;
  int channels = 16;
  // motif_counts[l - 1] is M_l; M_1 = 6 primitives, M_L = 1 cell.
  std::vector<int> motif_counts{kNumPrimitives, 1};
  // node_counts[l - 2][m - 1] is the node count of motif m at level l.
  std::vector<std::vector<int>> node_counts{{3}};

  int motif_count(int level) const { return motif_counts[level - 1]; }
  int node_count(int level, int motif) const {
    return node_counts[level - 2][motif - 1];
  }
  // Number of distinct operation indices usable at `level`, including none.
  int pool_size(int level) const { return motif_counts[level - 2] + 1; }
  bool is_flat() const { return levels == 2; }

  bool operator==(const HierarchySpec&) const = default;

  // Violations of the spec's own invariants (empty when consistent).
  std::vector<Violation> check() const;

  static HierarchySpec flat(int nodes, int channels);
  static HierarchySpec hierarchical(std::vector<int> motif_counts,
                                    std::vector<std::vector<int>> node_counts,
                                    int channels);
};

// Immutable hierarchical (or flat, L = 2) genotype. Copies share storage.
class Genotype {
 public:
  using Levels = std::vector<std::vector<MotifGraph>>;

  Genotype(HierarchySpec spec, Levels motifs, GenotypeId id);

  const HierarchySpec& spec() const { return data_->spec; }
  GenotypeId id() const { return id_; }
  // Motifs at level `level` (>= 2), as stored (may disagree with the spec
  // when the genotype came from an unvalidated source).
  const std::vector<MotifGraph>& level_motifs(int level) const {
    return data_->motifs[level - 2];
  }
  const Levels& motifs() const { return data_->motifs; }
  int stored_levels() const { return static_cast<int>(data_->motifs.size()) + 1; }
  const MotifGraph& motif(int level, int m) const {
    return data_->motifs[level - 2][m - 1];
  }

  Genotype with_edge(int level, int m, int succ, int pred, int k) const;
  Genotype with_id(GenotypeId id) const;

  // Same spec and motifs; ids are ignored.
  friend bool structurally_equal(const Genotype& a, const Genotype& b);

 private:
  struct Data {
    HierarchySpec spec;
    Levels motifs;
  };
  Genotype(std::shared_ptr<const Data> data, GenotypeId id)
      : data_(std::move(data)), id_(id) {}

  std::shared_ptr<const Data> data_;
  GenotypeId id_;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Genotype& g);

// Every motif is a chain 1 -> 2 -> ... -> n of the identity of the level
// below: the Identity primitive at level 2, motif index 1 above that.
Genotype trivial_genotype(const HierarchySpec& spec, IdCounter& ids = default_ids());

// True when every motif is exactly the trivial identity chain.
bool is_identity_chain(const Genotype& g);

std::string encode(const Genotype& g);
// Throws ParseError for malformed documents and InvalidGenotype for
// well-formed documents that break invariants. Documents without an id get
// one from `ids`.
Genotype decode(std::string_view text, IdCounter& ids = default_ids());

}  // namespace hiernas

#endif  // HIERNAS_CORE_GENOTYPE_H_
