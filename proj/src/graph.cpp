#include "assortgen/graph.hpp"

#include <algorithm>
#include <string>

#include "assortgen/error.hpp"

namespace assortgen {

Graph Graph::from_edge_list(std::size_t n, std::span<const Edge> edges) {
  Graph g;
  g.degrees_.assign(n, 0);
  g.adjacency_.assign(n, {});
  g.edges_.reserve(edges.size());
  g.edge_set_.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw Error(ErrorKind::NodeOutOfRange, "edge (" + std::to_string(e.u) + "," +
                                                 std::to_string(e.v) + ") with n=" + std::to_string(n));
    }
    if (e.u == e.v) {
      throw Error(ErrorKind::SelfLoop, "node " + std::to_string(e.u));
    }
    Edge c = make_edge(e.u, e.v);
    if (!g.edge_set_.insert(edge_key(c.u, c.v)).second) {
      throw Error(ErrorKind::MultiEdge, "(" + std::to_string(c.u) + "," + std::to_string(c.v) + ")");
    }
    g.edges_.push_back(c);
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  for (const Edge& e : g.edges_) {
    ++g.degrees_[e.u];
    ++g.degrees_[e.v];
    g.adjacency_[e.u].push_back(e.v);
    g.adjacency_[e.v].push_back(e.u);
  }
  g.max_degree_ = n == 0 ? 0 : *std::max_element(g.degrees_.begin(), g.degrees_.end());
  return g;
}

Graph Graph::from_edge_list(std::size_t n, std::span<const std::pair<Node, Node>> pairs) {
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [a, b] : pairs) edges.push_back(Edge{a, b});
  return from_edge_list(n, std::span<const Edge>(edges));
}

std::vector<Edge> Graph::to_edge_list() const {
  std::vector<Edge> out = edges_;
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t Graph::edge_set_hash() const {
  // Sum of mixed keys is order independent; mix again with N and E.
  std::uint64_t acc = 0;
  for (const Edge& e : edges_) acc += splitmix64(edge_key(e.u, e.v));
  return splitmix64(acc ^ splitmix64((num_nodes() << 32) ^ num_edges()));
}

void Graph::remove_neighbor(Node at, Node gone) {
  auto& nb = adjacency_[at];
  auto it = std::find(nb.begin(), nb.end(), gone);
  *it = nb.back();
  nb.pop_back();
}

void Graph::replace_edge_pair(std::size_t i, Edge a, std::size_t j, Edge b) {
  for (std::size_t slot : {i, j}) {
    const Edge old = edges_[slot];
    edge_set_.erase(edge_key(old.u, old.v));
    remove_neighbor(old.u, old.v);
    remove_neighbor(old.v, old.u);
  }
  edges_[i] = make_edge(a.u, a.v);
  edges_[j] = make_edge(b.u, b.v);
  for (std::size_t slot : {i, j}) {
    const Edge e = edges_[slot];
    edge_set_.insert(edge_key(e.u, e.v));
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
}

void Graph::check_invariants() const {
  std::vector<int> deg(num_nodes(), 0);
  absl::flat_hash_set<std::uint64_t> seen;
  for (const Edge& e : edges_) {
    if (e.u >= e.v) throw Error(ErrorKind::Internal, "edge not normalized or self-loop");
    if (!seen.insert(edge_key(e.u, e.v)).second) throw Error(ErrorKind::Internal, "multiedge");
    if (!edge_set_.contains(edge_key(e.u, e.v))) throw Error(ErrorKind::Internal, "edge set out of sync");
    ++deg[e.u];
    ++deg[e.v];
  }
  if (seen.size() != edge_set_.size()) throw Error(ErrorKind::Internal, "stale edge set entries");
  if (deg != degrees_) throw Error(ErrorKind::Internal, "degree array out of sync");
  for (std::size_t i = 0; i < num_nodes(); ++i) {
    if (adjacency_[i].size() != static_cast<std::size_t>(deg[i])) {
      throw Error(ErrorKind::Internal, "adjacency out of sync");
    }
    for (Node j : adjacency_[i]) {
      if (!has_edge(static_cast<Node>(i), j)) throw Error(ErrorKind::Internal, "adjacency entry without edge");
    }
  }
}

}  // namespace assortgen
