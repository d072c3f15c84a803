#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "porter/rng.hpp"

namespace porter {

/// Undirected communication graph on agents 0..n-1. Edges are stored as
/// (i, j) with i < j; no self-loops.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  bool has_edge(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::find(edges.begin(), edges.end(), std::make_pair(i, j)) !=
           edges.end();
  }

  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (const auto& [i, j] : edges) {
      ++deg[static_cast<std::size_t>(i)];
      ++deg[static_cast<std::size_t>(j)];
    }
    return deg;
  }

  /// BFS from node 0.
  bool connected() const {
    if (n <= 0) return false;
    if (n == 1) return true;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [i, j] : edges) {
      adj[static_cast<std::size_t>(i)].push_back(j);
      adj[static_cast<std::size_t>(j)].push_back(i);
    }
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> queue{0};
    seen[0] = 1;
    std::size_t head = 0;
    int count = 1;
    while (head < queue.size()) {
      const int u = queue[head++];
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          queue.push_back(v);
          ++count;
        }
      }
    }
    return count == n;
  }
};

namespace detail {
inline void add_edge(Graph& g, int i, int j) {
  if (i > j) std::swap(i, j);
  g.edges.emplace_back(i, j);
}
}  // namespace detail

/// Erdos-Renyi G(n, p): every unordered pair included independently with
/// probability p. Deterministic per (n, p, seed); may come back disconnected,
/// callers decide what to do about that.
inline Graph build_er_graph(int n, double p, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("build_er_graph: need n >= 2");
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("build_er_graph: p must be in [0, 1]");
  Graph g;
  g.n = n;
  auto stream = rng::make_stream(seed, rng::Purpose::GraphGen);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (stream.uniform01() < p) g.edges.emplace_back(i, j);
  return g;
}

/// ER graph resampled until connected (seed, seed+1, ...), up to max_tries.
inline Graph build_er_graph_connected(int n, double p, std::uint64_t seed,
                                      int max_tries = 100) {
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Graph g = build_er_graph(n, p, seed + static_cast<std::uint64_t>(attempt));
    if (g.connected()) return g;
  }
  throw std::runtime_error(
      "build_er_graph_connected: no connected sample within retry cap");
}

enum class NamedTopology { Ring, Complete, Path, Star };

inline NamedTopology parse_topology_kind(const std::string& name) {
  if (name == "ring") return NamedTopology::Ring;
  if (name == "complete") return NamedTopology::Complete;
  if (name == "path") return NamedTopology::Path;
  if (name == "star") return NamedTopology::Star;
  throw std::invalid_argument("unknown topology kind: " + name);
}

inline Graph build_named_graph(NamedTopology kind, int n) {
  if (n < 2) throw std::invalid_argument("build_named_graph: need n >= 2");
  Graph g;
  g.n = n;
  switch (kind) {
    case NamedTopology::Ring:
      // Ring of 2 is a single edge, ring of 3 a triangle.
      for (int i = 0; i + 1 < n; ++i) detail::add_edge(g, i, i + 1);
      if (n > 2) detail::add_edge(g, 0, n - 1);
      break;
    case NamedTopology::Complete:
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.edges.emplace_back(i, j);
      break;
    case NamedTopology::Path:
      for (int i = 0; i + 1 < n; ++i) detail::add_edge(g, i, i + 1);
      break;
    case NamedTopology::Star:
      for (int i = 1; i < n; ++i) g.edges.emplace_back(0, i);
      break;
  }
  return g;
}

/// Edge-list text format: first line "n <count>", then one "i j" per line.
inline void write_edge_list(const Graph& g, std::ostream& out) {
  out << "n " << g.n << "\n";
  for (const auto& [i, j] : g.edges) out << i << " " << j << "\n";
}

inline Graph read_edge_list(std::istream& in) {
  Graph g;
  std::string tag;
  if (!(in >> tag >> g.n) || tag != "n")
    throw std::runtime_error("edge list: expected header line 'n <count>'");
  if (g.n < 1) throw std::runtime_error("edge list: invalid agent count");
  int i = 0;
  int j = 0;
  while (in >> i >> j) {
    if (i == j || i < 0 || j < 0 || i >= g.n || j >= g.n)
      throw std::runtime_error("edge list: invalid edge");
    detail::add_edge(g, i, j);
  }
  return g;
}

}  // namespace porter
