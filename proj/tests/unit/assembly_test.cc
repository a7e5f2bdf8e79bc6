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

#include <doctest.h>

#include <set>

#include "core/assembly.h"
#include "core/genotype.h"
#include "oracles.h"

using namespace hiernas;

namespace {

HierarchySpec paper_spec() {
  return HierarchySpec::hierarchical({6, 6, 1}, {{4, 4, 4, 4, 4, 4}, {5}}, 16);
}

int count_op(const FlatArchitecture& a, PrimitiveOp op) {
  int n = 0;
  for (const auto& e : a.edges) n += e.op == op;
  return n;
}

void check_invariants(const FlatArchitecture& a) {
  std::vector<int> indeg(a.node_count(), 0), outdeg(a.node_count(), 0);
  for (const auto& e : a.edges) {
    CHECK(e.src < e.dst);
    CHECK(e.op != PrimitiveOp::kNone);
    ++outdeg[e.src];
    ++indeg[e.dst];
  }
  for (std::size_t v = 0; v < a.node_count(); ++v) {
    if (static_cast<int>(v) == a.source) {
      CHECK(indeg[v] == 0);
    } else {
      CHECK(indeg[v] > 0);
    }
    if (static_cast<int>(v) == a.sink) {
      CHECK(outdeg[v] == 0);
    } else {
      CHECK(outdeg[v] > 0);
    }
  }
}

}  // namespace

TEST_CASE("trivial flat genotype flattens to itself") {
  IdCounter ids;
  const auto a = flatten(trivial_genotype(HierarchySpec::flat(3, 16), ids));
  CHECK(a.node_count() == 3);
  REQUIRE(a.edges.size() == 2);
  CHECK(count_op(a, PrimitiveOp::kIdentity) == 2);
  CHECK(a.source == 0);
  CHECK(a.sink == 2);
}

TEST_CASE("trivial three-level genotype: 12 identities and 4 trailing convolutions") {
  IdCounter ids;
  const auto a = flatten(trivial_genotype(paper_spec(), ids));
  CHECK(a.edges.size() == 16);
  CHECK(count_op(a, PrimitiveOp::kIdentity) == 12);
  CHECK(count_op(a, PrimitiveOp::kConv1x1) == 4);
  CHECK(a.node_count() == 17);
  CHECK(longest_path(a) == 16);
  // A chain: identity x3 then conv, four times.
  for (std::size_t e = 0; e < a.edges.size(); ++e) {
    CHECK(a.edges[e].src == static_cast<int>(e));
    CHECK(a.edges[e].dst == static_cast<int>(e) + 1);
    CHECK(a.edges[e].op == (e % 4 == 3 ? PrimitiveOp::kConv1x1 : PrimitiveOp::kIdentity));
  }
}

TEST_CASE("empty top motif is degenerate") {
  IdCounter ids;
  auto g = trivial_genotype(paper_spec(), ids);
  for (int i = 2; i <= 5; ++i) g = g.with_edge(3, 1, i, i - 1, 0);
  CHECK_THROWS_AS(flatten(g), DegenerateArchitecture);
}

TEST_CASE("flatten matches the inline-expansion oracle") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto spec = oracle::random_spec(seed, 3, 5);
    const auto g = oracle::random_genotype(spec, seed * 7 + 1, 40);
    const auto expected = oracle::inline_expand(g);
    if (expected.degenerate) {
      CHECK_THROWS_AS(flatten(g), DegenerateArchitecture);
      continue;
    }
    const auto a = flatten(g);
    check_invariants(a);
    const auto got = oracle::rename_flat(a);
    CHECK(oracle::edge_multiset(got) == oracle::edge_multiset(expected));
    CHECK(oracle::node_set(got) == oracle::node_set(expected));
    CHECK(a.node_count() == oracle::node_set(expected).size());
  }
}

TEST_CASE("shape inference follows the channel rules") {
  FlatArchitecture a;
  a.nodes = {{0, {}}, {1, {}}, {2, {}}};
  a.source = 0;
  a.sink = 2;
  a.edges = {{0, 1, PrimitiveOp::kIdentity, std::nullopt, {}},
             {0, 2, PrimitiveOp::kSeparableConv3x3, std::nullopt, {}},
             {1, 2, PrimitiveOp::kMaxPool3x3, std::nullopt, {}}};
  const auto shapes = infer_shapes(a, {8, 24, 8, 8}, 16);
  CHECK(shapes[1] == TensorShape{8, 24, 8, 8});
  CHECK(shapes[2].channels == 16 + 24);
  for (const auto& s : shapes) {
    CHECK(s.height == 8);
    CHECK(s.width == 8);
  }
  // Two 16-channel inputs concatenate to 32.
  a.edges[1].op = PrimitiveOp::kConv1x1;
  CHECK(infer_shapes(a, {1, 16, 4, 4}, 16)[2].channels == 32);
}

TEST_CASE("per-edge parameter formulas") {
  CHECK(edge_parameters(PrimitiveOp::kConv1x1, 16, 16) == 288);
  CHECK(edge_parameters(PrimitiveOp::kSeparableConv3x3, 24, 16) == 632);
  CHECK(edge_parameters(PrimitiveOp::kDepthwiseConv3x3, 16, 16) == 9 * 16 + 32);
  CHECK(edge_parameters(PrimitiveOp::kIdentity, 16, 16) == 0);
  CHECK(edge_parameters(PrimitiveOp::kMaxPool3x3, 16, 16) == 0);
  CHECK(edge_parameters(PrimitiveOp::kAvgPool3x3, 16, 16) == 0);
}

TEST_CASE("identity chains carry no parameters") {
  IdCounter ids;
  for (int n = 2; n < 9; ++n) {
    const auto a = flatten(trivial_genotype(HierarchySpec::flat(n, 16), ids));
    CHECK(count_parameters(a, {1, 16, 8, 8}, 16) == 0);
  }
}

TEST_CASE("shapes and parameters agree with the walker oracle") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto spec = oracle::random_spec(seed + 1000, 3, 5);
    const auto g = oracle::random_genotype(spec, seed, 60);
    const auto named = oracle::inline_expand(g);
    if (named.degenerate) continue;
    const auto a = flatten(g);
    const TensorShape input{2, spec.channels, 5, 7};
    const auto shapes = infer_shapes(a, input, spec.channels);
    std::uint64_t additive = 0;
    for (const auto& e : a.edges) {
      CHECK(shapes[e.src].height == 5);
      CHECK(shapes[e.dst].width == 7);
      const auto cin = shapes[e.src].channels;
      additive += edge_parameters(e.op, cin, edge_output_channels(e, cin, spec.channels, shapes));
    }
    const auto counted = count_parameters(a, input, spec.channels);
    CHECK(counted == additive);
    CHECK(counted == oracle::walk_parameters(named, spec.channels, spec.channels));
  }
}

TEST_CASE("flattening a flat genotype only prunes") {
  IdCounter ids;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto g = oracle::random_genotype(HierarchySpec::flat(6, 8), seed, 30);
    FlatArchitecture a;
    try {
      a = flatten(g);
    } catch (const DegenerateArchitecture&) {
      continue;
    }
    // Re-encode the pruned graph as a flat genotype and flatten again.
    const int n = static_cast<int>(a.node_count());
    Genotype::Levels motifs{{MotifGraph(n)}};
    for (const auto& e : a.edges) motifs[0][0].set_op(e.dst + 1, e.src + 1, static_cast<int>(e.op));
    const Genotype again(HierarchySpec::flat(n, 8), motifs, ids.next());
    const auto b = flatten(again);
    REQUIRE(b.edges.size() == a.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) {
      CHECK(a.edges[i].src == b.edges[i].src);
      CHECK(a.edges[i].dst == b.edges[i].dst);
      CHECK(a.edges[i].op == b.edges[i].op);
    }
  }
}

TEST_CASE("dot export: trivial flat motif") {
  IdCounter ids;
  const auto text = to_dot(trivial_genotype(HierarchySpec::flat(3, 16), ids));
  CHECK(text.find("digraph \"Cell\"") != std::string::npos);
  CHECK(text.find("1 -> 2 [label=\"identity\"]") != std::string::npos);
  CHECK(text.find("2 -> 3 [label=\"identity\"]") != std::string::npos);
}

TEST_CASE("dot export: paper configuration gives seven graphs") {
  IdCounter ids;
  const auto g = oracle::random_genotype(paper_spec(), 5, 200);
  const auto graphs = to_dot_graphs(g);
  REQUIRE(graphs.size() == 7);
  std::set<std::string> names;
  for (const auto& gr : graphs) names.insert(gr.filename);
  CHECK(names.count("cell.dot") == 1);
  for (int m = 1; m <= 6; ++m) CHECK(names.count("motif_" + std::to_string(m) + ".dot") == 1);
  CHECK(to_dot(g) == to_dot(g));
}
