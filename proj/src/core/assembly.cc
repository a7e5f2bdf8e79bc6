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

#include "core/assembly.h"

#include <algorithm>
#include <functional>
#include <queue>
#include <utility>

#include <fmt/format.h>

namespace hiernas {

namespace {

// Builds the expanded graph with creation-order ids; finish() prunes and
// renumbers topologically.
class Expander {
 public:
  explicit Expander(const Genotype& g) : g_(g) {}

  FlatArchitecture run() {
    const int top = g_.spec().levels;
    const int n = g_.motif(top, 1).nodes();
    const int source = new_node({{}, 1});
    const int sink = new_node({{}, n});
    expand(top, 1, source, sink, {});
    return finish(source, sink);
  }

 private:
  int new_node(Provenance provenance) {
    nodes_.push_back(FlatNode{static_cast<int>(nodes_.size()), std::move(provenance)});
    return static_cast<int>(nodes_.size()) - 1;
  }

  // Expands motif (level, m) with motif node 1 bound to `src` and motif node
  // n bound to `dst`.
  void expand(int level, int m, int src, int dst, const std::vector<ExpansionStep>& path) {
    const auto& motif = g_.motif(level, m);
    const int n = motif.nodes();
    std::vector<int> local(n + 1, -1);
    local[1] = src;
    local[n] = dst;
    for (int v = 2; v < n; ++v) local[v] = new_node({path, v});
    for (int i = 2; i <= n; ++i) {
      for (int j = 1; j < i; ++j) {
        const int k = motif.op(i, j);
        if (k == 0) continue;
        if (level == 2) {
          FlatEdge edge;
          edge.src = local[j];
          edge.dst = local[i];
          edge.op = static_cast<PrimitiveOp>(k);
          edge.provenance = {path, i, j, false};
          edges_.push_back(std::move(edge));
          continue;
        }
        auto sub = path;
        sub.push_back({level, m, i, j});
        inline_motif(level - 1, k, local[j], local[i], sub);
      }
    }
  }

  void inline_motif(int level, int m, int host_src, int host_dst,
                    const std::vector<ExpansionStep>& path) {
    if (level > 2) {
      expand(level, m, host_src, host_dst, path);
      return;
    }
    // A level-2 motif gets its own output node followed by a 1x1 convolution
    // back to the motif input width.
    const int n = g_.motif(level, m).nodes();
    const int out = new_node({path, n});
    expand(level, m, host_src, out, path);
    FlatEdge conv;
    conv.src = out;
    conv.dst = host_dst;
    conv.op = PrimitiveOp::kConv1x1;
    conv.width_of = host_src;
    conv.provenance = {path, n, n, true};
    edges_.push_back(std::move(conv));
  }

  FlatArchitecture finish(int source, int sink) {
    const std::size_t count = nodes_.size();
    std::vector<std::vector<int>> out_edges(count), in_edges(count);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      out_edges[edges_[e].src].push_back(static_cast<int>(e));
      in_edges[edges_[e].dst].push_back(static_cast<int>(e));
    }
    auto sweep = [&](int start, const std::vector<std::vector<int>>& adj, bool forward) {
      std::vector<char> seen(count, 0);
      std::vector<int> stack{start};
      seen[start] = 1;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int e : adj[v]) {
          const int w = forward ? edges_[e].dst : edges_[e].src;
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
        }
      }
      return seen;
    };
    const auto from_source = sweep(source, out_edges, true);
    if (!from_source[sink]) {
      throw DegenerateArchitecture("no path from the cell input to the cell output");
    }
    const auto to_sink = sweep(sink, in_edges, false);
    std::vector<char> keep(count);
    for (std::size_t v = 0; v < count; ++v) keep[v] = from_source[v] && to_sink[v];

    // Kahn's algorithm over kept nodes; ties broken by creation order.
    std::vector<int> indegree(count, 0);
    for (const auto& e : edges_) {
      if (keep[e.src] && keep[e.dst]) ++indegree[e.dst];
    }
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    ready.push(source);
    std::vector<int> renumber(count, -1);
    FlatArchitecture arch;
    while (!ready.empty()) {
      const int v = ready.top();
      ready.pop();
      renumber[v] = static_cast<int>(arch.nodes.size());
      arch.nodes.push_back(FlatNode{renumber[v], nodes_[v].provenance});
      for (int e : out_edges[v]) {
        const int w = edges_[e].dst;
        if (keep[w] && --indegree[w] == 0) ready.push(w);
      }
    }
    for (const auto& e : edges_) {
      if (!keep[e.src] || !keep[e.dst]) continue;
      FlatEdge copy = e;
      copy.src = renumber[e.src];
      copy.dst = renumber[e.dst];
      if (copy.width_of) copy.width_of = renumber[*copy.width_of];
      arch.edges.push_back(std::move(copy));
    }
    std::stable_sort(arch.edges.begin(), arch.edges.end(), [](const auto& a, const auto& b) {
      return std::pair(a.dst, a.src) < std::pair(b.dst, b.src);
    });
    arch.source = renumber[source];
    arch.sink = renumber[sink];
    return arch;
  }

  const Genotype& g_;
  std::vector<FlatNode> nodes_;
  std::vector<FlatEdge> edges_;
};

}  // namespace

FlatArchitecture flatten(const Genotype& g) {
  if (auto report = validate(g); !report.ok()) {
    throw InvalidGenotype(std::move(report.violations));
  }
  return Expander(g).run();
}

std::string to_string(const TensorShape& s) {
  return fmt::format("({}, {}, {}, {})", s.batch, s.channels, s.height, s.width);
}

std::int64_t edge_output_channels(const FlatEdge& edge, std::int64_t src_channels,
                                  std::int64_t fixed_channels,
                                  const std::vector<TensorShape>& shapes) {
  if (edge.width_of) return shapes[*edge.width_of].channels;
  switch (edge.op) {
    case PrimitiveOp::kConv1x1:
    case PrimitiveOp::kSeparableConv3x3:
      return fixed_channels;
    default:
      return src_channels;
  }
}

std::vector<TensorShape> infer_shapes(const FlatArchitecture& a, const TensorShape& input,
                                      std::int64_t fixed_channels) {
  std::vector<TensorShape> shapes(a.node_count(), input);
  for (auto& s : shapes) s.channels = 0;
  shapes[a.source].channels = input.channels;
  // Edges are sorted by destination, and every source id precedes its
  // destination, so a node's width is final before any edge reads it.
  for (const auto& e : a.edges) {
    shapes[e.dst].channels +=
        edge_output_channels(e, shapes[e.src].channels, fixed_channels, shapes);
  }
  return shapes;
}

std::uint64_t edge_parameters(PrimitiveOp op, std::int64_t in_channels,
                              std::int64_t out_channels) {
  const auto cin = static_cast<std::uint64_t>(in_channels);
  const auto cout = static_cast<std::uint64_t>(out_channels);
  switch (op) {
    case PrimitiveOp::kConv1x1:
      return cin * cout + 2 * cout;
    case PrimitiveOp::kSeparableConv3x3:
      return 9 * cin + cin * cout + 2 * cout;
    case PrimitiveOp::kDepthwiseConv3x3:
      return 9 * cin + 2 * cin;
    default:
      return 0;
  }
}

std::uint64_t count_parameters(const FlatArchitecture& a, const TensorShape& input,
                               std::int64_t fixed_channels) {
  const auto shapes = infer_shapes(a, input, fixed_channels);
  std::uint64_t total = 0;
  for (const auto& e : a.edges) {
    const auto cin = shapes[e.src].channels;
    total += edge_parameters(e.op, cin, edge_output_channels(e, cin, fixed_channels, shapes));
  }
  return total;
}

int longest_path(const FlatArchitecture& a) {
  std::vector<int> depth(a.node_count(), -1);
  depth[a.source] = 0;
  for (const auto& e : a.edges) {
    if (depth[e.src] >= 0) depth[e.dst] = std::max(depth[e.dst], depth[e.src] + 1);
  }
  return depth[a.sink];
}

// ---------------------------------------------------------------------------
// DOT

namespace {

std::string motif_title(const HierarchySpec& spec, int level, int m) {
  if (level == spec.levels) return "Cell";
  if (level == 2) return fmt::format("Motif {}", m);
  return fmt::format("Level {} Motif {}", level, m);
}

std::string motif_filename(const HierarchySpec& spec, int level, int m) {
  if (level == spec.levels) return "cell.dot";
  if (level == 2) return fmt::format("motif_{}.dot", m);
  return fmt::format("level{}_motif_{}.dot", level, m);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<DotGraph> to_dot_graphs(const Genotype& g) {
  const auto& spec = g.spec();
  std::vector<DotGraph> graphs;
  for (int l = 2; l <= spec.levels; ++l) {
    for (int m = 1; m <= spec.motif_count(l); ++m) {
      const auto& motif = g.motif(l, m);
      DotGraph graph;
      graph.name = motif_title(spec, l, m);
      graph.filename = motif_filename(spec, l, m);
      std::string& out = graph.text;
      out += fmt::format("digraph {} {{\n", quote(graph.name));
      out += "  rankdir=LR;\n";
      out += "  node [shape=circle];\n";
      for (int v = 1; v <= motif.nodes(); ++v) out += fmt::format("  {};\n", v);
      for (int j = 1; j <= motif.nodes(); ++j) {
        for (int i = j + 1; i <= motif.nodes(); ++i) {
          const int k = motif.op(i, j);
          if (k == 0) continue;
          const std::string label = l == 2 ? primitive_label(static_cast<PrimitiveOp>(k))
                                           : motif_title(spec, l - 1, k);
          out += fmt::format("  {} -> {} [label={}];\n", j, i, quote(label));
        }
      }
      out += "}\n";
      graphs.push_back(std::move(graph));
    }
  }
  return graphs;
}

std::string to_dot(const Genotype& g) {
  std::string out;
  for (const auto& graph : to_dot_graphs(g)) out += graph.text;
  return out;
}

std::string to_dot(const FlatArchitecture& a) {
  std::string out = "digraph \"Flat\" {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (const auto& n : a.nodes) out += fmt::format("  {};\n", n.id);
  for (const auto& e : a.edges) {
    out += fmt::format("  {} -> {} [label={}];\n", e.src, e.dst, quote(primitive_label(e.op)));
  }
  return out + "}\n";
}

}  // namespace hiernas
