#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_set.h>

#include "assortgen/rng.hpp"

namespace assortgen {

using Node = std::uint32_t;

/// Undirected edge stored with u < v.
struct Edge {
  Node u{0};
  Node v{0};

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(Node a, Node b) { return a < b ? Edge{a, b} : Edge{b, a}; }

inline std::uint64_t edge_key(Node a, Node b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

/// Simple undirected graph.
///
/// Edges live in slots. A slot always holds a normalized edge (u < v);
/// degree-preserving rewirings replace the contents of two slots in place so
/// edge indices stay stable across a trajectory. `to_edge_list()` returns the
/// canonical (lexicographically sorted) edge list used for hashing,
/// comparison and serialization.
class Graph {
public:
  Graph() = default;

  /// Builds a graph from node pairs. Throws Error with kind SelfLoop,
  /// MultiEdge or NodeOutOfRange.
  static Graph from_edge_list(std::size_t n, std::span<const std::pair<Node, Node>> pairs);
  static Graph from_edge_list(std::size_t n, std::span<const Edge> edges);

  std::size_t num_nodes() const noexcept { return degrees_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t slot) const { return edges_[slot]; }
  const std::vector<int>& degrees() const noexcept { return degrees_; }
  int degree(Node i) const { return degrees_[i]; }
  int max_degree() const noexcept { return max_degree_; }
  const std::vector<Node>& neighbors(Node i) const { return adjacency_[i]; }

  bool has_edge(Node a, Node b) const { return edge_set_.contains(edge_key(a, b)); }

  std::vector<Edge> to_edge_list() const;
  std::vector<int> degree_sequence() const { return degrees_; }

  /// Order-independent 64-bit hash of the edge set.
  std::uint64_t edge_set_hash() const;

  /// Replaces the edges in slots i and j. Caller guarantees the result stays
  /// simple and degree-preserving; used by rewire::apply.
  void replace_edge_pair(std::size_t i, Edge a, std::size_t j, Edge b);

  /// Checks all structural invariants; throws Error(Internal) on violation.
  void check_invariants() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.num_nodes() == b.num_nodes() && a.to_edge_list() == b.to_edge_list();
  }

private:
  void remove_neighbor(Node at, Node gone);

  std::vector<Edge> edges_;
  std::vector<int> degrees_;
  std::vector<std::vector<Node>> adjacency_;
  absl::flat_hash_set<std::uint64_t> edge_set_;
  int max_degree_{0};
};

/// Reads the "N E" + E lines "u v" text format. '#' lines are comments.
Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);
void write_edge_list(std::ostream& out, const Graph& g);
void write_edge_list_file(const std::string& path, const Graph& g);

/// Default accepted-swap budget for configuration-model randomization (20 E).
inline std::size_t default_swap_budget(const Graph& g) { return 20 * g.num_edges(); }

/// Randomizes g with `swap_budget` accepted uniform double-edge swaps.
/// Invalid proposals are skipped; at most 100 * swap_budget proposals are made.
Graph randomize_configuration(const Graph& g, Seed seed, std::size_t swap_budget);

}  // namespace assortgen
