#include "assortgen/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "assortgen/error.hpp"

namespace assortgen {

namespace {

// Accumulates edges while rejecting duplicates and self-loops.
class EdgeSet {
public:
  explicit EdgeSet(std::size_t n) : n_(n) {}

  bool add(Node a, Node b) {
    if (a == b) return false;
    if (!keys_.insert(edge_key(a, b)).second) return false;
    edges_.push_back(make_edge(a, b));
    return true;
  }
  bool contains(Node a, Node b) const { return keys_.contains(edge_key(a, b)); }
  void remove(Node a, Node b) {
    keys_.erase(edge_key(a, b));
    const Edge e = make_edge(a, b);
    auto it = std::find(edges_.begin(), edges_.end(), e);
    if (it != edges_.end()) {
      *it = edges_.back();
      edges_.pop_back();
    }
  }
  std::size_t size() const { return edges_.size(); }
  Graph build() const { return Graph::from_edge_list(n_, std::span<const Edge>(edges_)); }

private:
  std::size_t n_;
  std::vector<Edge> edges_;
  absl::flat_hash_set<std::uint64_t> keys_;
};

// Number of failures before the next success of a Bernoulli(p) sequence.
std::uint64_t geometric_skip(Rng& rng, double log1mp) {
  const double r = 1.0 - uniform01(rng);  // (0, 1]
  const double s = std::floor(std::log(r) / log1mp);
  return s > 1e18 ? std::uint64_t{1} << 62 : static_cast<std::uint64_t>(s);
}

// Visits each index of [0, count) independently with probability p.
template <typename Fn>
void bernoulli_indices(Rng& rng, std::uint64_t count, double p, Fn&& visit) {
  if (p <= 0.0 || count == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < count; ++i) visit(i);
    return;
  }
  const double log1mp = std::log1p(-p);
  std::uint64_t i = geometric_skip(rng, log1mp);
  while (i < count) {
    visit(i);
    i += 1 + geometric_skip(rng, log1mp);
  }
}

// Decodes linear index over pairs (i < j) of an m-node set: index = j(j-1)/2 + i.
std::pair<std::uint64_t, std::uint64_t> decode_pair(std::uint64_t idx) {
  auto j = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(idx))) / 2.0);
  while (j * (j - 1) / 2 > idx) --j;
  while ((j + 1) * j / 2 <= idx) ++j;
  return {idx - j * (j - 1) / 2, j};
}

void add_gnp_block(EdgeSet& es, Rng& rng, Node offset, std::uint64_t size, double p) {
  bernoulli_indices(rng, size * (size - 1) / 2, p, [&](std::uint64_t idx) {
    auto [i, j] = decode_pair(idx);
    es.add(static_cast<Node>(offset + i), static_cast<Node>(offset + j));
  });
}

void add_bipartite_block(EdgeSet& es, Rng& rng, Node off_a, std::uint64_t size_a, Node off_b,
                         std::uint64_t size_b, double p) {
  bernoulli_indices(rng, size_a * size_b, p, [&](std::uint64_t idx) {
    es.add(static_cast<Node>(off_a + idx / size_b), static_cast<Node>(off_b + idx % size_b));
  });
}

Graph gen_er(const ModelSpec& s, Rng& rng) {
  EdgeSet es(s.n);
  const std::uint64_t n = s.n;
  if (s.num_edges) {
    const std::uint64_t max_edges = n * (n - 1) / 2;
    if (*s.num_edges > max_edges) throw Error(ErrorKind::InvalidArgument, "ER edge count exceeds n(n-1)/2");
    if (*s.num_edges * 2 > max_edges) {
      // dense: pick the complement's size from a shuffled pair list
      std::vector<std::uint64_t> idx(max_edges);
      for (std::uint64_t i = 0; i < max_edges; ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t k = 0; k < *s.num_edges; ++k) {
        auto [i, j] = decode_pair(idx[k]);
        es.add(static_cast<Node>(i), static_cast<Node>(j));
      }
    } else {
      while (es.size() < *s.num_edges) {
        es.add(static_cast<Node>(uniform_index(rng, s.n)), static_cast<Node>(uniform_index(rng, s.n)));
      }
    }
    return es.build();
  }
  add_gnp_block(es, rng, 0, n, s.mean_degree / static_cast<double>(n - 1));
  return es.build();
}

Graph gen_ws(const ModelSpec& s, Rng& rng) {
  const std::size_t n = s.n;
  const std::size_t half = static_cast<std::size_t>(std::max(1.0, std::round(s.mean_degree / 2.0)));
  EdgeSet es(n);
  for (std::size_t j = 1; j <= half; ++j) {
    for (std::size_t i = 0; i < n; ++i) es.add(static_cast<Node>(i), static_cast<Node>((i + j) % n));
  }
  if (s.rewire_p > 0.0) {
    std::vector<std::size_t> deg(n, 2 * half);
    for (std::size_t j = 1; j <= half; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        if (uniform01(rng) >= s.rewire_p) continue;
        const Node u = static_cast<Node>(i);
        const Node v = static_cast<Node>((i + j) % n);
        if (!es.contains(u, v) || deg[u] >= n - 1) continue;
        Node w = static_cast<Node>(uniform_index(rng, n));
        while (w == u || es.contains(u, w)) w = static_cast<Node>(uniform_index(rng, n));
        es.remove(u, v);
        es.add(u, w);
        --deg[v];
        ++deg[w];
      }
    }
  }
  return es.build();
}

// Preferential-attachment growth shared by BA and HK (triad_p = 0 gives BA).
Graph gen_growth(const ModelSpec& s, double triad_p, Rng& rng) {
  const std::size_t n = s.n;
  const std::size_t m = growth_edges_per_node(s);
  EdgeSet es(n);
  std::vector<std::vector<Node>> adj(n);
  std::vector<Node> ends;  // each node appears once per incident edge
  auto link = [&](Node a, Node b) {
    es.add(a, b);
    adj[a].push_back(b);
    adj[b].push_back(a);
    ends.push_back(a);
    ends.push_back(b);
  };
  for (Node a = 0; a <= m; ++a) {
    for (Node b = a + 1; b <= m; ++b) link(a, b);
  }
  std::vector<Node> chosen;
  for (Node t = static_cast<Node>(m + 1); t < n; ++t) {
    chosen.clear();
    Node last_pa = 0;
    auto pa_pick = [&]() {
      while (true) {
        Node c = ends[uniform_index(rng, ends.size())];
        if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) return c;
      }
    };
    while (chosen.size() < m) {
      Node target;
      bool triad = false;
      if (!chosen.empty() && triad_p > 0.0 && uniform01(rng) < triad_p) {
        std::vector<Node> cand;
        for (Node w : adj[last_pa]) {
          if (std::find(chosen.begin(), chosen.end(), w) == chosen.end()) cand.push_back(w);
        }
        if (!cand.empty()) {
          target = cand[uniform_index(rng, cand.size())];
          triad = true;
        }
      }
      if (!triad) {
        target = pa_pick();
        last_pa = target;
      }
      chosen.push_back(target);
    }
    for (Node c : chosen) link(t, c);
  }
  return es.build();
}

Graph gen_sbm(const ModelSpec& s, Rng& rng) {
  const std::size_t n = s.n;
  const std::size_t b = s.num_blocks;
  std::vector<std::uint64_t> size(b, n / b);
  for (std::size_t i = 0; i < n % b; ++i) ++size[i];
  std::vector<Node> offset(b, 0);
  for (std::size_t i = 1; i < b; ++i) offset[i] = static_cast<Node>(offset[i - 1] + size[i - 1]);
  double intra = 0.0;
  double inter = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    intra += static_cast<double>(size[i] * (size[i] - 1));
    for (std::size_t j = 0; j < b; ++j) {
      if (i != j) inter += static_cast<double>(size[i] * size[j]);
    }
  }
  const double p_out = static_cast<double>(n) * s.mean_degree / (s.block_ratio * intra + inter);
  const double p_in = s.block_ratio * p_out;
  if (p_in > 1.0) throw Error(ErrorKind::InvalidArgument, "SBM mean degree too large for block sizes");
  EdgeSet es(n);
  for (std::size_t i = 0; i < b; ++i) {
    add_gnp_block(es, rng, offset[i], size[i], p_in);
    for (std::size_t j = i + 1; j < b; ++j) add_bipartite_block(es, rng, offset[i], size[i], offset[j], size[j], p_out);
  }
  return es.build();
}

Graph gen_rgg(const ModelSpec& s, Rng& rng) {
  const std::size_t n = s.n;
  const double r = std::sqrt(s.mean_degree / (static_cast<double>(n) * std::numbers::pi));
  if (r >= 0.5) throw Error(ErrorKind::InvalidArgument, "RGG radius must be < 0.5 on the unit torus");
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = uniform01(rng);
    y[i] = uniform01(rng);
  }
  const double r2 = r * r;
  auto close = [&](std::size_t i, std::size_t j) {
    double dx = std::abs(x[i] - x[j]);
    double dy = std::abs(y[i] - y[j]);
    dx = std::min(dx, 1.0 - dx);
    dy = std::min(dy, 1.0 - dy);
    return dx * dx + dy * dy <= r2;
  };
  EdgeSet es(n);
  const auto cells = static_cast<std::size_t>(std::floor(1.0 / r));
  if (cells < 3) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (close(i, j)) es.add(static_cast<Node>(i), static_cast<Node>(j));
      }
    }
    return es.build();
  }
  std::vector<std::vector<std::size_t>> grid(cells * cells);
  auto cell_of = [&](double c) { return std::min(cells - 1, static_cast<std::size_t>(c * static_cast<double>(cells))); };
  for (std::size_t i = 0; i < n; ++i) grid[cell_of(x[i]) * cells + cell_of(y[i])].push_back(i);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cx = cell_of(x[i]);
    const std::size_t cy = cell_of(y[i]);
    for (std::size_t dx = 0; dx < 3; ++dx) {
      for (std::size_t dy = 0; dy < 3; ++dy) {
        const std::size_t gx = (cx + cells + dx - 1) % cells;
        const std::size_t gy = (cy + cells + dy - 1) % cells;
        for (std::size_t j : grid[gx * cells + gy]) {
          if (j > i && close(i, j)) es.add(static_cast<Node>(i), static_cast<Node>(j));
        }
      }
    }
  }
  return es.build();
}

// Expected mean degree of a Chung-Lu graph with weights `w` (sorted
// descending) and edge probabilities min(1, w_i w_j / S).
double chung_lu_mean_degree(const std::vector<double>& w) {
  const std::size_t n = w.size();
  double total = 0.0;
  for (double v : w) total += v;
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + w[i];
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double threshold = total / w[i];
    // prefix [0, p) has w_j >= threshold, i.e. probability clipped at 1
    const auto p = static_cast<std::size_t>(
        std::partition_point(w.begin(), w.end(), [&](double v) { return v >= threshold; }) - w.begin());
    double deg = static_cast<double>(p) + w[i] * suffix[p] / total;
    deg -= i < p ? 1.0 : w[i] * w[i] / total;
    sum += deg;
  }
  return sum / static_cast<double>(n);
}

Graph gen_cl(const ModelSpec& s, Rng& rng) {
  const std::size_t n = s.n;
  const double expo = 1.0 / (s.cl_gamma - 1.0);
  std::vector<double> base(n);
  for (std::size_t i = 0; i < n; ++i) base[i] = std::pow(static_cast<double>(i + 1), -expo);
  auto scaled = [&](double c) {
    std::vector<double> w(base);
    for (double& v : w) v *= c;
    return w;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (chung_lu_mean_degree(scaled(hi)) < s.mean_degree) {
    hi *= 2.0;
    if (hi > 1e12) throw Error(ErrorKind::InvalidArgument, "CL mean degree unreachable");
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (chung_lu_mean_degree(scaled(mid)) < s.mean_degree ? lo : hi) = mid;
  }
  const std::vector<double> w = scaled(0.5 * (lo + hi));
  double total = 0.0;
  for (double v : w) total += v;
  EdgeSet es(n);
  for (std::size_t u = 0; u + 1 < n; ++u) {
    std::size_t v = u + 1;
    double p = std::min(w[u] * w[v] / total, 1.0);
    while (v < n && p > 0.0) {
      if (p < 1.0) v += geometric_skip(rng, std::log1p(-p));
      if (v < n) {
        const double q = std::min(w[u] * w[v] / total, 1.0);
        if (uniform01(rng) < q / p) es.add(static_cast<Node>(u), static_cast<Node>(v));
        p = q;
        ++v;
      }
    }
  }
  return es.build();
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::WS: return "WS";
    case Family::ER: return "ER";
    case Family::BA: return "BA";
    case Family::SBM: return "SBM";
    case Family::RGG: return "RGG";
    case Family::CL: return "CL";
    case Family::HK: return "HK";
  }
  return "?";
}

Family family_from_string(std::string_view s) {
  for (Family f : {Family::WS, Family::ER, Family::BA, Family::SBM, Family::RGG, Family::CL, Family::HK}) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown graph family '" + std::string(s) + "'");
}

std::size_t growth_edges_per_node(const ModelSpec& spec) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(spec.mean_degree / 2.0)));
}

void ModelSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidArgument, msg); };
  if (n < 2) fail("n must be >= 2");
  if (!(mean_degree > 0.0) || mean_degree >= static_cast<double>(n - 1)) fail("mean degree must lie in (0, n-1)");
  switch (family) {
    case Family::WS: {
      const double k = 2.0 * std::max(1.0, std::round(mean_degree / 2.0));
      if (k >= static_cast<double>(n)) fail("WS ring degree must be < n");
      if (rewire_p < 0.0 || rewire_p > 1.0) fail("WS rewiring probability must lie in [0,1]");
      break;
    }
    case Family::ER:
      break;
    case Family::BA:
    case Family::HK:
      if (growth_edges_per_node(*this) + 1 > n - 1) fail("BA/HK requires m < n - 1");
      if (triad_p < 0.0 || triad_p > 1.0) fail("HK triad probability must lie in [0,1]");
      break;
    case Family::SBM:
      if (num_blocks < 1 || num_blocks > n / 2) fail("SBM block count must lie in [1, n/2]");
      if (!(block_ratio > 0.0)) fail("SBM block ratio must be positive");
      break;
    case Family::RGG:
      break;
    case Family::CL:
      if (!(cl_gamma > 2.0)) fail("CL degree exponent must be > 2");
      break;
  }
}

Graph generate(const ModelSpec& spec, Seed seed) {
  spec.validate();
  Rng rng = make_rng(seed);
  switch (spec.family) {
    case Family::WS: return gen_ws(spec, rng);
    case Family::ER: return gen_er(spec, rng);
    case Family::BA: return gen_growth(spec, 0.0, rng);
    case Family::HK: return gen_growth(spec, spec.triad_p, rng);
    case Family::SBM: return gen_sbm(spec, rng);
    case Family::RGG: return gen_rgg(spec, rng);
    case Family::CL: return gen_cl(spec, rng);
  }
  throw Error(ErrorKind::Internal, "unhandled family");
}

}  // namespace assortgen
