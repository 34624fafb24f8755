#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "netdesign/rng.hpp"

namespace netdesign {

// Simple undirected graph on vertices 0..num_vertices-1 with sorted
// adjacency lists. Immutable after construction; safe to share across
// threads. Graphs with isolated vertices can be built (some canonical
// examples need them) but are flagged via has_isolated_vertex() and
// rejected by operations whose formulas divide by d(v).
class Graph {
 public:
  Graph() = default;

  static Graph from_edges(int num_vertices, const std::vector<std::pair<int, int>>& edges) {
    if (num_vertices <= 0) throw std::invalid_argument("graph: num_vertices must be positive");
    Graph g;
    g.adjacency_.assign(num_vertices, {});
    std::vector<std::pair<int, int>> normalized;
    normalized.reserve(edges.size());
    for (auto [u, v] : edges) {
      if (u < 0 || u >= num_vertices || v < 0 || v >= num_vertices)
        throw std::invalid_argument("graph: vertex index out of range");
      if (u == v) throw std::invalid_argument("graph: self-loop not allowed");
      normalized.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(normalized.begin(), normalized.end());
    if (std::adjacent_find(normalized.begin(), normalized.end()) != normalized.end())
      throw std::invalid_argument("graph: duplicate edge");
    for (auto [u, v] : normalized) {
      g.adjacency_[u].push_back(v);
      g.adjacency_[v].push_back(u);
    }
    for (auto& nbrs : g.adjacency_) std::sort(nbrs.begin(), nbrs.end());
    g.num_edges_ = normalized.size();
    return g;
  }

  int num_vertices() const { return static_cast<int>(adjacency_.size()); }
  std::size_t num_edges() const { return num_edges_; }

  std::span<const int> neighbors(int v) const { return adjacency_.at(v); }
  int degree(int v) const { return static_cast<int>(adjacency_.at(v).size()); }

  bool has_edge(int u, int v) const {
    const auto& nbrs = adjacency_.at(u);
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
  }

  bool has_isolated_vertex() const {
    for (const auto& nbrs : adjacency_)
      if (nbrs.empty()) return true;
    return false;
  }

  // Edges as sorted pairs (u < v).
  std::vector<std::pair<int, int>> edge_list() const {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(num_edges_);
    for (int u = 0; u < num_vertices(); ++u)
      for (int v : adjacency_[u])
        if (u < v) edges.emplace_back(u, v);
    return edges;
  }

 private:
  std::vector<std::vector<int>> adjacency_;
  std::size_t num_edges_ = 0;
};

inline Graph build_graph(int num_vertices, const std::vector<std::pair<int, int>>& edges) {
  return Graph::from_edges(num_vertices, edges);
}

struct DegreeStats {
  int dmin = 0;
  int dmax = 0;
  std::map<int, long> degree_histogram;
};

inline DegreeStats degree_stats(const Graph& g) {
  DegreeStats stats;
  stats.dmin = g.num_vertices();
  for (int v = 0; v < g.num_vertices(); ++v) {
    const int d = g.degree(v);
    stats.dmin = std::min(stats.dmin, d);
    stats.dmax = std::max(stats.dmax, d);
    ++stats.degree_histogram[d];
  }
  return stats;
}

// G(N, p): each unordered pair is an edge independently with probability
// edge_prob. May produce isolated vertices; callers that need the
// no-isolated-vertex assumption must check the flag.
inline Graph gen_erdos_renyi(int n_vertices, double edge_prob, std::uint64_t seed) {
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0))
    throw std::invalid_argument("gen_erdos_renyi: edge_prob must be in [0,1]");
  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n_vertices; ++u)
    for (int v = u + 1; v < n_vertices; ++v)
      if (rng.next_bernoulli(edge_prob)) edges.emplace_back(u, v);
  return Graph::from_edges(n_vertices, edges);
}

// Preferential attachment PA(N, pow, m): start from a single vertex and add
// one vertex at a time; vertex v picks min(m, v) distinct existing targets,
// sampled without replacement with weight max(d(u),1)^pow, renormalizing
// after each draw. The max(.,1) keeps the process defined at the start,
// where every vertex still has degree zero.
inline Graph gen_preferential_attachment(int n_vertices, double pow, int m, std::uint64_t seed) {
  if (m <= 0) throw std::invalid_argument("gen_preferential_attachment: m must be positive");
  if (n_vertices <= m)
    throw std::invalid_argument("gen_preferential_attachment: need n_vertices > m");
  if (pow < 0.0) throw std::invalid_argument("gen_preferential_attachment: pow must be >= 0");
  Rng rng(seed);
  std::vector<int> degree(n_vertices, 0);
  std::vector<std::pair<int, int>> edges;
  std::vector<char> taken(n_vertices, 0);
  for (int v = 1; v < n_vertices; ++v) {
    const int draws = std::min(m, v);
    std::fill(taken.begin(), taken.begin() + v, 0);
    for (int t = 0; t < draws; ++t) {
      int target = -1;
      if (v == 1) {
        target = 0;
      } else {
        double total = 0.0;
        for (int u = 0; u < v; ++u)
          if (!taken[u]) total += std::pow(std::max(degree[u], 1), pow);
        double ticket = rng.next_double() * total;
        for (int u = 0; u < v; ++u) {
          if (taken[u]) continue;
          ticket -= std::pow(std::max(degree[u], 1), pow);
          if (ticket <= 0.0) {
            target = u;
            break;
          }
        }
        if (target < 0) {  // ticket landed on accumulated rounding; take last free
          for (int u = v - 1; u >= 0; --u)
            if (!taken[u]) {
              target = u;
              break;
            }
        }
      }
      taken[target] = 1;
      edges.emplace_back(target, v);
      ++degree[target];
      ++degree[v];
    }
  }
  return Graph::from_edges(n_vertices, edges);
}

// Product graph H x {0,1}^{V(H)}, read as 2^{|V(H)|} disjoint copies of H
// (one per sign vector; edges only inside a copy). Vertex (v, eps) gets
// index slice*|V(H)| + v where bit w of slice is eps_w. Returns the graph,
// the type partition grouping all copies of each H-vertex, and the
// canonical half-coloring Q = {(v, eps) : eps_v = 1}.
struct CopiesGraph {
  Graph graph;
  std::vector<std::vector<int>> type_parts;
  std::vector<int> canonical_coloring;
};

inline CopiesGraph gen_copies_graph(const Graph& h) {
  const int hn = h.num_vertices();
  if (hn <= 1) throw std::invalid_argument("gen_copies_graph: |V(H)| must exceed 1");
  if (hn > 20) throw std::invalid_argument("gen_copies_graph: |V(H)| too large (2^|V(H)| copies)");
  const int slices = 1 << hn;
  CopiesGraph out;
  std::vector<std::pair<int, int>> edges;
  const auto h_edges = h.edge_list();
  edges.reserve(static_cast<std::size_t>(slices) * h_edges.size());
  for (int s = 0; s < slices; ++s)
    for (auto [u, v] : h_edges) edges.emplace_back(s * hn + u, s * hn + v);
  out.graph = Graph::from_edges(slices * hn, edges);
  out.type_parts.assign(hn, {});
  for (int s = 0; s < slices; ++s)
    for (int v = 0; v < hn; ++v) {
      out.type_parts[v].push_back(s * hn + v);
      if ((s >> v) & 1) out.canonical_coloring.push_back(s * hn + v);
    }
  std::sort(out.canonical_coloring.begin(), out.canonical_coloring.end());
  return out;
}

// Plain-text edge list: first line "num_vertices E", then E lines "u v".
// The writer emits edges sorted; the reader tolerates any order.
inline void write_graph(std::ostream& os, const Graph& g) {
  os << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (auto [u, v] : g.edge_list()) os << u << ' ' << v << '\n';
}

inline Graph read_graph(std::istream& is) {
  int n = 0;
  std::size_t e = 0;
  if (!(is >> n >> e)) throw std::runtime_error("graph file: missing header");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(e);
  for (std::size_t i = 0; i < e; ++i) {
    int u = 0, v = 0;
    if (!(is >> u >> v)) throw std::runtime_error("graph file: truncated edge list");
    edges.emplace_back(u, v);
  }
  return Graph::from_edges(n, edges);
}

}  // namespace netdesign
