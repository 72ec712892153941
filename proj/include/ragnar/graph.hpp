#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ragnar/errors.hpp"
#include "ragnar/parallel.hpp"
#include "ragnar/rng.hpp"
#include "ragnar/text.hpp"

namespace ragnar {

using Edge = std::pair<int, int>;

/// Unweighted graph over nodes [0, n). Undirected edges are stored as (i, j)
/// with i < j; directed edges as (from, to). Immutable once built.
class Graph {
 public:
  Graph() = default;

  Graph(int n_nodes, std::vector<Edge> edges, bool directed = false, std::uint64_t seed = 0)
      : n_nodes_(n_nodes), directed_(directed), seed_(seed) {
    if (n_nodes < 1) throw DomainError("graph needs at least one node");
    for (auto& [a, b] : edges) {
      if (a < 0 || b < 0 || a >= n_nodes || b >= n_nodes)
        throw RangeError("edge (" + std::to_string(a) + "," + std::to_string(b) + ") outside [0," +
                         std::to_string(n_nodes) + ")");
      if (a == b) throw DomainError("self-loop at node " + std::to_string(a));
      if (!directed && a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);
    in_adj_.assign(n_nodes_, {});
    for (const auto& [a, b] : edges_) {
      in_adj_[b].push_back(a);
      if (!directed_) in_adj_[a].push_back(b);
    }
    for (auto& adj : in_adj_) std::sort(adj.begin(), adj.end());
  }

  int n_nodes() const { return n_nodes_; }
  bool directed() const { return directed_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  /// Nodes whose value feeds node i: all adjacent nodes when undirected,
  /// sources of edges into i when directed. Sorted ascending.
  const std::vector<int>& neighbours(int i) const { return in_adj_.at(i); }

  bool has_edge(int from, int to) const {
    if (!directed_ && from > to) std::swap(from, to);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_nodes_ == b.n_nodes_ && a.directed_ == b.directed_ && a.seed_ == b.seed_ &&
           a.edges_ == b.edges_;
  }

 private:
  int n_nodes_ = 0;
  bool directed_ = false;
  std::uint64_t seed_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> in_adj_;
};

/// Erdős–Rényi–Gilbert G(n, pi). Pairs are visited row-major over i < j and
/// each consumes exactly one 64-bit draw, so for a fixed seed the edge set is
/// monotone in pi.
inline Graph generate_graph(int n_nodes, double edge_prob, std::uint64_t seed) {
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
    throw DomainError("edge probability must lie in [0,1], got " + text::format_double(edge_prob));
  if (n_nodes < 1) throw DomainError("graph needs at least one node");
  Rng rng(seed);
  const bool always = edge_prob >= 1.0;
  const std::uint64_t threshold = bernoulli_threshold(edge_prob);
  std::vector<Edge> edges;
  for (int i = 0; i < n_nodes; ++i)
    for (int j = i + 1; j < n_nodes; ++j) {
      const std::uint64_t draw = rng.next();
      if (always || draw < threshold) edges.emplace_back(i, j);
    }
  return Graph(n_nodes, std::move(edges), false, seed);
}

/// `count` graphs; graph k is seeded with derive_seed(base_seed, k), so the
/// ensemble does not depend on the worker count.
inline std::vector<Graph> generate_ensemble(int n_nodes, double edge_prob, std::uint64_t base_seed,
                                            std::size_t count, unsigned threads = 1) {
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
    throw DomainError("edge probability must lie in [0,1], got " + text::format_double(edge_prob));
  std::vector<Graph> out(count);
  parallel_for(count, threads, [&](std::size_t k) {
    out[k] = generate_graph(n_nodes, edge_prob, derive_seed(base_seed, k));
  });
  return out;
}

/// BFS layers around `root`: stages[r-1] holds the nodes at shortest-path
/// distance r (following edges into the current layer for directed graphs).
struct StagedNeighbourhood {
  int root = 0;
  std::vector<std::vector<int>> stages;

  int max_stage() const { return static_cast<int>(stages.size()); }
  const std::vector<int>& stage(int r) const { return stages.at(r - 1); }
};

inline StagedNeighbourhood neighbour_sets(const Graph& graph, int root, int max_stage) {
  if (root < 0 || root >= graph.n_nodes())
    throw RangeError("root " + std::to_string(root) + " outside [0," + std::to_string(graph.n_nodes()) + ")");
  if (max_stage < 1) throw DomainError("max_stage must be at least 1");
  StagedNeighbourhood nb;
  nb.root = root;
  nb.stages.resize(max_stage);
  std::vector<char> seen(graph.n_nodes(), 0);
  seen[root] = 1;
  std::vector<int> frontier{root};
  for (int r = 0; r < max_stage && !frontier.empty(); ++r) {
    std::vector<int> next;
    for (int u : frontier)
      for (int v : graph.neighbours(u))
        if (!seen[v]) {
          seen[v] = 1;
          next.push_back(v);
        }
    std::sort(next.begin(), next.end());
    nb.stages[r] = next;
    frontier = std::move(next);
  }
  return nb;
}

/// Per stage, node -> 1/|stage|. Empty stages map to an empty map.
using StageWeights = std::vector<std::map<int, double>>;

inline StageWeights stage_weights(const StagedNeighbourhood& nb) {
  StageWeights out(nb.stages.size());
  for (std::size_t r = 0; r < nb.stages.size(); ++r) {
    const auto& s = nb.stages[r];
    for (int v : s) out[r][v] = 1.0 / static_cast<double>(s.size());
  }
  return out;
}

/// Directed graph with j -> i whenever j is a stage-1 neighbour of i in
/// per_node_best[i].
inline Graph build_directed_graph(const std::vector<Graph>& per_node_best) {
  const int n = static_cast<int>(per_node_best.size());
  if (n == 0) throw ShapeError("no per-node graphs given");
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    const Graph& g = per_node_best[i];
    if (g.n_nodes() != n)
      throw ShapeError("graph for node " + std::to_string(i) + " has " + std::to_string(g.n_nodes()) +
                       " nodes, expected " + std::to_string(n));
    for (int j : g.neighbours(i)) edges.emplace_back(j, i);
  }
  return Graph(n, std::move(edges), true, 0);
}

// Edge-list text format: a header line `nodes=N directed=0|1 seed=S`
// followed by one `i j` line per edge. Ensemble files concatenate blocks.

inline void write_graph(std::ostream& os, const Graph& g) {
  os << "nodes=" << g.n_nodes() << " directed=" << (g.directed() ? 1 : 0) << " seed=" << g.seed() << '\n';
  for (const auto& [a, b] : g.edges()) os << a << ' ' << b << '\n';
}

inline void write_graphs(std::ostream& os, const std::vector<Graph>& graphs) {
  for (const auto& g : graphs) write_graph(os, g);
}

inline std::vector<Graph> read_graphs(std::istream& is) {
  std::vector<Graph> out;
  int n = 0;
  bool directed = false, open = false;
  std::uint64_t seed = 0;
  std::vector<Edge> edges;
  auto flush = [&] {
    if (open) out.emplace_back(n, std::move(edges), directed, seed);
    edges.clear();
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto t = text::trim(line);
    if (t.empty()) continue;
    if (t.rfind("nodes=", 0) == 0) {
      flush();
      std::istringstream hs{std::string(t)};
      std::string tok;
      bool got_n = false, got_d = false, got_s = false;
      while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw DataError("bad graph header at line " + std::to_string(line_no));
        auto key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "nodes") {
          n = static_cast<int>(text::parse_int(val));
          got_n = true;
        } else if (key == "directed") {
          directed = text::parse_int(val) != 0;
          got_d = true;
        } else if (key == "seed") {
          seed = text::parse_uint(val);
          got_s = true;
        }
      }
      if (!(got_n && got_d && got_s)) throw DataError("incomplete graph header at line " + std::to_string(line_no));
      open = true;
      continue;
    }
    if (!open) throw DataError("edge before graph header at line " + std::to_string(line_no));
    std::istringstream es{std::string(t)};
    int a = 0, b = 0;
    if (!(es >> a >> b)) throw DataError("bad edge line " + std::to_string(line_no));
    edges.emplace_back(a, b);
  }
  flush();
  return out;
}

}  // namespace ragnar
