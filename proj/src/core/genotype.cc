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

#include "core/genotype.h"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include <json.hpp>

namespace hiernas {

using nlohmann::json;

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kInvalidGenotype: return "InvalidGenotype";
    case ErrorCode::kDegenerateArchitecture: return "DegenerateArchitecture";
    case ErrorCode::kEvaluationFailure: return "EvaluationFailure";
    case ErrorCode::kNumericFailure: return "NumericFailure";
    case ErrorCode::kSpatialUnderflow: return "SpatialUnderflow";
    case ErrorCode::kIncompatibleCheckpoint: return "IncompatibleCheckpoint";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

std::string Violation::to_string() const {
  std::string out = kind;
  if (level > 0) out += fmt::format(" at level {}", level);
  if (motif > 0) out += fmt::format(" motif {}", motif);
  if (succ > 0 || pred > 0) out += fmt::format(" edge ({}, {})", succ, pred);
  if (!detail.empty()) out += ": " + detail;
  return out;
}

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.to_string();
  }
  return out;
}

}  // namespace

InvalidGenotype::InvalidGenotype(std::vector<Violation> violations)
    : Error(ErrorCode::kInvalidGenotype,
            "invalid genotype: " + join_violations(violations)),
      violations_(std::move(violations)) {}

const char* primitive_name(PrimitiveOp op) {
  switch (op) {
    case PrimitiveOp::kNone: return "none";
    case PrimitiveOp::kIdentity: return "identity";
    case PrimitiveOp::kConv1x1: return "conv_1x1";
    case PrimitiveOp::kDepthwiseConv3x3: return "dw_conv_3x3";
    case PrimitiveOp::kSeparableConv3x3: return "sep_conv_3x3";
    case PrimitiveOp::kMaxPool3x3: return "max_pool_3x3";
    case PrimitiveOp::kAvgPool3x3: return "avg_pool_3x3";
  }
  return "?";
}

const char* primitive_label(PrimitiveOp op) {
  switch (op) {
    case PrimitiveOp::kNone: return "none";
    case PrimitiveOp::kIdentity: return "identity";
    case PrimitiveOp::kConv1x1: return "1 × 1";
    case PrimitiveOp::kDepthwiseConv3x3: return "3 × 3 depthwise";
    case PrimitiveOp::kSeparableConv3x3: return "3 × 3 separable";
    case PrimitiveOp::kMaxPool3x3: return "max-pooling";
    case PrimitiveOp::kAvgPool3x3: return "avg-pooling";
  }
  return "?";
}

IdCounter& default_ids() {
  static IdCounter counter;
  return counter;
}

// ---------------------------------------------------------------------------
// MotifGraph

MotifGraph::MotifGraph(int nodes)
    : nodes_(nodes),
      ops_(nodes >= 2 ? static_cast<std::size_t>(nodes) * (nodes - 1) / 2 : 0, 0) {
  if (nodes < 1) throw std::invalid_argument("motif needs at least one node");
}

std::size_t MotifGraph::slot(int succ, int pred) const {
  if (pred < 1 || pred >= succ || succ > nodes_) {
    throw std::out_of_range(
        fmt::format("edge ({}, {}) outside a {}-node motif", succ, pred, nodes_));
  }
  return static_cast<std::size_t>(succ - 1) * (succ - 2) / 2 + (pred - 1);
}

int MotifGraph::edge_count() const {
  return static_cast<int>(std::count_if(ops_.begin(), ops_.end(),
                                        [](int k) { return k != 0; }));
}

// ---------------------------------------------------------------------------
// HierarchySpec

std::vector<Violation> HierarchySpec::check() const {
  std::vector<Violation> out;
  auto bad = [&](std::string detail, int level = 0, int motif = 0) {
    out.push_back({"invalid spec", level, motif, 0, 0, std::move(detail)});
  };
  if (levels < 2) bad(fmt::format("levels = {} but at least 2 are required", levels));
  if (channels < 1) bad(fmt::format("channels = {} must be positive", channels));
  if (static_cast<int>(motif_counts.size()) != levels) {
    bad(fmt::format("{} motif counts for {} levels", motif_counts.size(), levels));
    return out;
  }
  if (levels < 2) return out;
  if (motif_counts.front() != kNumPrimitives) {
    bad(fmt::format("level 1 must hold the {} primitives, got {}", kNumPrimitives,
                    motif_counts.front()), 1);
  }
  if (motif_counts.back() != 1) {
    bad(fmt::format("top level must hold a single motif, got {}", motif_counts.back()),
        levels);
  }
  for (int l = 2; l <= levels; ++l) {
    if (motif_counts[l - 1] < 1) bad("motif count must be positive", l);
  }
  if (static_cast<int>(node_counts.size()) != levels - 1) {
    bad(fmt::format("{} node-count lists for {} non-primitive levels",
                    node_counts.size(), levels - 1));
    return out;
  }
  for (int l = 2; l <= levels; ++l) {
    const auto& row = node_counts[l - 2];
    if (static_cast<int>(row.size()) != motif_counts[l - 1]) {
      bad(fmt::format("{} node counts for {} motifs", row.size(), motif_counts[l - 1]), l);
      continue;
    }
    for (std::size_t m = 0; m < row.size(); ++m) {
      if (row[m] < 2) {
        bad(fmt::format("motif has {} nodes, needs at least 2", row[m]), l,
            static_cast<int>(m) + 1);
      }
    }
  }
  return out;
}

HierarchySpec HierarchySpec::flat(int nodes, int channels) {
  HierarchySpec spec;
  spec.levels = 2;
  spec.channels = channels;
  spec.motif_counts = {kNumPrimitives, 1};
  spec.node_counts = {{nodes}};
  return spec;
}

HierarchySpec HierarchySpec::hierarchical(std::vector<int> motif_counts,
                                          std::vector<std::vector<int>> node_counts,
                                          int channels) {
  HierarchySpec spec;
  spec.levels = static_cast<int>(motif_counts.size());
  spec.channels = channels;
  spec.motif_counts = std::move(motif_counts);
  spec.node_counts = std::move(node_counts);
  return spec;
}

// ---------------------------------------------------------------------------
// Genotype

Genotype::Genotype(HierarchySpec spec, Levels motifs, GenotypeId id)
    : data_(std::make_shared<const Data>(Data{std::move(spec), std::move(motifs)})),
      id_(id) {}

Genotype Genotype::with_edge(int level, int m, int succ, int pred, int k) const {
  Data copy = *data_;
  copy.motifs.at(level - 2).at(m - 1).set_op(succ, pred, k);
  return Genotype(std::make_shared<const Data>(std::move(copy)), id_);
}

Genotype Genotype::with_id(GenotypeId id) const { return Genotype(data_, id); }

bool structurally_equal(const Genotype& a, const Genotype& b) {
  if (a.data_ == b.data_) return true;
  return a.data_->spec == b.data_->spec && a.data_->motifs == b.data_->motifs;
}

ValidationReport validate(const Genotype& g) {
  ValidationReport report;
  auto& out = report.violations;
  const auto& spec = g.spec();
  out = spec.check();
  const bool spec_ok = out.empty();

  const int stored = g.stored_levels();
  if (stored != spec.levels) {
    out.push_back({"shape mismatch", 0, 0, 0, 0,
                   fmt::format("genotype has {} levels, spec says {}", stored, spec.levels)});
  }
  for (int l = 2; l <= stored; ++l) {
    const auto& row = g.level_motifs(l);
    const bool level_in_spec = l <= spec.levels &&
                               static_cast<int>(spec.motif_counts.size()) >= l &&
                               static_cast<int>(spec.node_counts.size()) >= l - 1;
    if (level_in_spec && static_cast<int>(row.size()) != spec.motif_counts[l - 1]) {
      out.push_back({"shape mismatch", l, 0, 0, 0,
                     fmt::format("level has {} motifs, spec says {}", row.size(),
                                 spec.motif_counts[l - 1])});
    }
    for (std::size_t mi = 0; mi < row.size(); ++mi) {
      const int m = static_cast<int>(mi) + 1;
      const auto& motif = row[mi];
      if (level_in_spec && mi < spec.node_counts[l - 2].size() &&
          motif.nodes() != spec.node_counts[l - 2][mi]) {
        out.push_back({"shape mismatch", l, m, 0, 0,
                       fmt::format("motif has {} nodes, spec says {}", motif.nodes(),
                                   spec.node_counts[l - 2][mi])});
      }
      if (!spec_ok || l > spec.levels) continue;
      const int pool = spec.pool_size(l);
      for (int i = 2; i <= motif.nodes(); ++i) {
        for (int j = 1; j < i; ++j) {
          const int k = motif.op(i, j);
          if (k < 0 || k >= pool) {
            out.push_back({"operation index out of range", l, m, i, j,
                           fmt::format("k = {} but the level-{} pool has {} entries", k,
                                       l - 1, pool)});
          }
        }
      }
    }
  }
  return report;
}

Genotype trivial_genotype(const HierarchySpec& spec, IdCounter& ids) {
  if (auto problems = spec.check(); !problems.empty()) {
    throw InvalidGenotype(std::move(problems));
  }
  Genotype::Levels levels;
  for (int l = 2; l <= spec.levels; ++l) {
    // Identity primitive at level 2, motif 1 (itself an identity chain) above.
    const int identity = l == 2 ? static_cast<int>(PrimitiveOp::kIdentity) : 1;
    std::vector<MotifGraph> row;
    for (int m = 1; m <= spec.motif_count(l); ++m) {
      MotifGraph motif(spec.node_count(l, m));
      for (int i = 2; i <= motif.nodes(); ++i) motif.set_op(i, i - 1, identity);
      row.push_back(std::move(motif));
    }
    levels.push_back(std::move(row));
  }
  return Genotype(spec, std::move(levels), ids.next());
}

bool is_identity_chain(const Genotype& g) {
  const auto& spec = g.spec();
  for (int l = 2; l <= spec.levels; ++l) {
    const int identity = l == 2 ? static_cast<int>(PrimitiveOp::kIdentity) : 1;
    for (const auto& motif : g.level_motifs(l)) {
      for (int i = 2; i <= motif.nodes(); ++i) {
        for (int j = 1; j < i; ++j) {
          const int want = j == i - 1 ? identity : 0;
          if (motif.op(i, j) != want) return false;
        }
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Canonical document

namespace {

std::string int_list(const std::vector<int>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(xs[i]);
  }
  return out + "]";
}

}  // namespace

std::string encode(const Genotype& g) {
  if (auto report = validate(g); !report.ok()) {
    throw InvalidGenotype(std::move(report.violations));
  }
  const auto& spec = g.spec();
  std::string out = "{\n";
  out += "  \"version\": 1,\n";
  out += fmt::format("  \"id\": {},\n", g.id().value);
  out += fmt::format("  \"levels\": {},\n", spec.levels);
  out += fmt::format("  \"channels\": {},\n", spec.channels);
  out += fmt::format("  \"motif_counts\": {},\n", int_list(spec.motif_counts));
  out += "  \"node_counts\": [";
  for (std::size_t l = 0; l < spec.node_counts.size(); ++l) {
    if (l) out += ", ";
    out += int_list(spec.node_counts[l]);
  }
  out += "],\n";
  out += "  \"motifs\": [\n";
  bool first_motif = true;
  for (int l = 2; l <= spec.levels; ++l) {
    for (int m = 1; m <= spec.motif_count(l); ++m) {
      const auto& motif = g.motif(l, m);
      if (!first_motif) out += ",\n";
      first_motif = false;
      out += fmt::format("    {{\"level\": {}, \"motif\": {}, \"nodes\": {}, \"edges\": [", l,
                         m, motif.nodes());
      bool first_edge = true;
      for (int i = 2; i <= motif.nodes(); ++i) {
        for (int j = 1; j < i; ++j) {
          const int k = motif.op(i, j);
          if (k == 0) continue;
          out += first_edge ? "\n" : ",\n";
          first_edge = false;
          out += fmt::format("      [{}, {}, {}]", i, j, k);
        }
      }
      out += first_edge ? "]}" : "\n    ]}";
    }
  }
  out += "\n  ]\n}\n";
  return out;
}

namespace {

void require_keys(const json& obj, std::initializer_list<std::string_view> required,
                  std::initializer_list<std::string_view> optional,
                  std::string_view where) {
  if (!obj.is_object()) throw ParseError(fmt::format("{} must be an object", where));
  for (const auto& [key, value] : obj.items()) {
    const bool known =
        std::find(required.begin(), required.end(), key) != required.end() ||
        std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw ParseError(fmt::format("unknown key '{}' in {}", key, where));
  }
  for (auto key : required) {
    if (!obj.contains(std::string(key))) {
      throw ParseError(fmt::format("missing key '{}' in {}", key, where));
    }
  }
}

int as_int(const json& v, std::string_view what) {
  if (!v.is_number_integer()) throw ParseError(fmt::format("{} must be an integer", what));
  const auto x = v.get<std::int64_t>();
  if (x < INT32_MIN || x > INT32_MAX) throw ParseError(fmt::format("{} out of range", what));
  return static_cast<int>(x);
}

std::vector<int> as_int_list(const json& v, std::string_view what) {
  if (!v.is_array()) throw ParseError(fmt::format("{} must be a list", what));
  std::vector<int> out;
  for (const auto& x : v) out.push_back(as_int(x, what));
  return out;
}

constexpr int kMaxLevels = 32;
constexpr int kMaxNodes = 4096;

}  // namespace

Genotype decode(std::string_view text, IdCounter& ids) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed genotype document: {}", e.what()));
  }
  require_keys(doc, {"version", "levels", "channels", "motif_counts", "node_counts", "motifs"},
               {"id"}, "genotype document");
  if (as_int(doc["version"], "version") != 1) {
    throw ParseError("unsupported genotype document version");
  }
  HierarchySpec spec;
  spec.levels = as_int(doc["levels"], "levels");
  if (spec.levels > kMaxLevels) throw ParseError("too many levels");
  spec.channels = as_int(doc["channels"], "channels");
  spec.motif_counts = as_int_list(doc["motif_counts"], "motif_counts");
  if (!doc["node_counts"].is_array()) throw ParseError("node_counts must be a list");
  spec.node_counts.clear();
  for (const auto& row : doc["node_counts"]) {
    spec.node_counts.push_back(as_int_list(row, "node_counts"));
  }

  std::optional<GenotypeId> id;
  if (doc.contains("id")) {
    if (!doc["id"].is_number_unsigned()) throw ParseError("id must be a non-negative integer");
    id = GenotypeId{doc["id"].get<std::uint64_t>()};
  }

  if (!doc["motifs"].is_array()) throw ParseError("motifs must be a list");
  // level -> motifs in document order; must be numbered 1, 2, ... per level.
  std::map<int, std::vector<MotifGraph>> by_level;
  std::vector<Violation> structural;
  for (const auto& entry : doc["motifs"]) {
    require_keys(entry, {"level", "motif", "nodes", "edges"}, {}, "motif entry");
    const int level = as_int(entry["level"], "level");
    const int m = as_int(entry["motif"], "motif");
    const int nodes = as_int(entry["nodes"], "nodes");
    if (level < 2) throw ParseError(fmt::format("motif entry at level {} < 2", level));
    if (nodes < 1 || nodes > kMaxNodes) {
      throw ParseError(fmt::format("motif entry with {} nodes", nodes));
    }
    if (level > kMaxLevels) throw ParseError("too many levels");
    if (!by_level.empty() && level < by_level.rbegin()->first) {
      throw ParseError("motif entries must be in ascending level order");
    }
    auto& row = by_level[level];
    if (m != static_cast<int>(row.size()) + 1) {
      throw ParseError(fmt::format("level {} motif {} is out of sequence or duplicated",
                                   level, m));
    }
    MotifGraph motif(nodes);
    if (!entry["edges"].is_array()) throw ParseError("edges must be a list");
    std::set<std::pair<int, int>> seen;
    for (const auto& edge : entry["edges"]) {
      const auto triple = as_int_list(edge, "edge");
      if (triple.size() != 3) throw ParseError("edges are [i, j, k] triples");
      const int i = triple[0], j = triple[1], k = triple[2];
      if (!seen.emplace(i, j).second) {
        throw ParseError(fmt::format("duplicate edge ({}, {}) in level {} motif {}", i, j,
                                     level, m));
      }
      if (j >= i) {
        structural.push_back({"acyclicity violation", level, m, i, j,
                              "predecessor must precede successor"});
        continue;
      }
      if (j < 1 || i > nodes) {
        structural.push_back({"node index out of range", level, m, i, j,
                              fmt::format("motif has {} nodes", nodes)});
        continue;
      }
      motif.set_op(i, j, k);
    }
    row.push_back(std::move(motif));
  }
  if (!structural.empty()) throw InvalidGenotype(std::move(structural));

  Genotype::Levels levels;
  const int max_level = by_level.empty() ? 1 : by_level.rbegin()->first;
  for (int l = 2; l <= std::max(max_level, spec.levels); ++l) {
    auto it = by_level.find(l);
    levels.push_back(it == by_level.end() ? std::vector<MotifGraph>{} : std::move(it->second));
  }
  Genotype g(std::move(spec), std::move(levels), id ? *id : ids.next());
  if (auto report = validate(g); !report.ok()) {
    throw InvalidGenotype(std::move(report.violations));
  }
  return g;
}

}  // namespace hiernas
