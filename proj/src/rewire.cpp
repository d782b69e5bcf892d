#include "assortgen/rewire.hpp"

#include <string>

#include "assortgen/error.hpp"

namespace assortgen {

std::pair<Edge, Edge> pair_for_mode(Edge a, Edge b, int mode) {
  if (mode == 0) return {make_edge(a.u, b.u), make_edge(a.v, b.v)};
  return {make_edge(a.u, b.v), make_edge(a.v, b.u)};
}

namespace {

bool same_set(std::pair<Edge, Edge> p, std::pair<Edge, Edge> q) {
  return (p.first == q.first && p.second == q.second) || (p.first == q.second && p.second == q.first);
}

}  // namespace

DegreeSequenceContext DegreeSequenceContext::of(const Graph& g) {
  DegreeSequenceContext ctx;
  ctx.num_edges = g.num_edges();
  // sum over edges of (k_i + k_j) = sum_i k_i^2; of (k_i^2 + k_j^2) = sum_i k_i^3.
  long double s1 = 0;
  long double s2 = 0;
  long double sum_k = 0;
  long double sum_k2 = 0;
  for (int k : g.degrees()) {
    const long double kk = k;
    s1 += kk * kk;
    s2 += kk * kk * kk;
    sum_k += kk;
    sum_k2 += kk * kk;
  }
  const std::size_t n = g.num_nodes();
  if (ctx.num_edges > 0) {
    const long double two_e = 2.0L * static_cast<long double>(ctx.num_edges);
    const long double mu = s1 / two_e;
    ctx.mu = static_cast<double>(mu);
    ctx.denom = static_cast<double>(s2 / two_e - mu * mu);
    if (ctx.denom < 0 && ctx.denom > -1e-12) ctx.denom = 0;
  }
  if (n > 0) {
    const long double mean = sum_k / n;
    ctx.var_k = static_cast<double>(sum_k2 / n - mean * mean);
  }
  return ctx;
}

std::pair<Edge, Edge> rewired_pair(const Graph& g, const RewiringAction& a) {
  return pair_for_mode(g.edge(a.e1), g.edge(a.e2), a.mode);
}

bool is_valid(const Graph& g, const RewiringAction& a) {
  const std::size_t m = g.num_edges();
  if (a.e1 >= m || a.e2 >= m || a.e1 == a.e2 || (a.mode != 0 && a.mode != 1)) return false;
  const Edge old1 = g.edge(a.e1);
  const Edge old2 = g.edge(a.e2);
  const auto [n1, n2] = pair_for_mode(old1, old2, a.mode);
  if (n1.u == n1.v || n2.u == n2.v) return false;
  if (n1 == n2) return false;
  if (same_set({n1, n2}, {old1, old2})) return false;
  if (g.has_edge(n1.u, n1.v) || g.has_edge(n2.u, n2.v)) return false;
  return true;
}

std::int64_t delta_k_unchecked(const Graph& g, const RewiringAction& a) {
  const Edge e1 = g.edge(a.e1);
  const Edge e2 = g.edge(a.e2);
  const auto& k = g.degrees();
  const std::int64_t ku = k[e1.u], kv = k[e1.v], kx = k[e2.u], ky = k[e2.v];
  const std::int64_t before = ku * kv + kx * ky;
  if (a.mode == 0) return ku * kx + kv * ky - before;
  return ku * ky + kv * kx - before;
}

std::int64_t delta_k(const Graph& g, const RewiringAction& a) {
  if (!is_valid(g, a)) throw Error(ErrorKind::InvalidAction, "delta_k of invalid rewiring");
  return delta_k_unchecked(g, a);
}

double delta_rho(const DegreeSequenceContext& ctx, std::int64_t dk) {
  if (ctx.degenerate()) throw Error(ErrorKind::Degenerate, "zero endpoint-degree variance");
  return static_cast<double>(dk) / (static_cast<double>(ctx.num_edges) * ctx.denom);
}

void apply_unchecked(Graph& g, const RewiringAction& a) {
  const auto [n1, n2] = rewired_pair(g, a);
  g.replace_edge_pair(a.e1, n1, a.e2, n2);
}

void apply(Graph& g, const RewiringAction& a) {
  if (!is_valid(g, a)) {
    throw Error(ErrorKind::InvalidAction, "apply of invalid rewiring (e1=" + std::to_string(a.e1) +
                                              ", e2=" + std::to_string(a.e2) + ")");
  }
  apply_unchecked(g, a);
}

RewiringAction inverse(const Graph& g_before, const RewiringAction& a) {
  const Edge old1 = g_before.edge(a.e1);
  const Edge old2 = g_before.edge(a.e2);
  const auto [n1, n2] = rewired_pair(g_before, a);
  for (int mode : {0, 1}) {
    if (same_set(pair_for_mode(n1, n2, mode), {old1, old2})) return RewiringAction{a.e1, a.e2, mode};
  }
  throw Error(ErrorKind::InvalidAction, "no inverse pairing");
}

RewiringAction random_action(const Graph& g, Rng& rng) {
  const std::size_t m = g.num_edges();
  RewiringAction a;
  a.e1 = uniform_index(rng, m);
  a.e2 = uniform_index(rng, m - 1);
  if (a.e2 >= a.e1) ++a.e2;
  a.mode = static_cast<int>(rng() & 1U);
  return a;
}

}  // namespace assortgen
