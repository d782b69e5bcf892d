#include "assortgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "assortgen/error.hpp"
#include "assortgen/rewire.hpp"

namespace assortgen {

std::int64_t k_sum(const Graph& g) {
  const auto& k = g.degrees();
  std::int64_t total = 0;
  for (const Edge& e : g.edges()) total += static_cast<std::int64_t>(k[e.u]) * k[e.v];
  return total;
}

double assortativity_from_k(std::int64_t k, std::size_t num_edges, double mu, double denom) {
  return (static_cast<double>(k) / static_cast<double>(num_edges) - mu * mu) / denom;
}

double assortativity(const Graph& g) {
  const auto ctx = DegreeSequenceContext::of(g);
  if (g.num_edges() == 0 || ctx.degenerate()) {
    throw Error(ErrorKind::Degenerate, "assortativity undefined for zero endpoint-degree variance");
  }
  const double rho = assortativity_from_k(k_sum(g), ctx.num_edges, ctx.mu, ctx.denom);
  return std::clamp(rho, -1.0, 1.0);
}

double clustering(const Graph& g) {
  const std::size_t n = g.num_nodes();
  if (n == 0) return 0.0;
  std::vector<char> mark(n, 0);
  double sum = 0.0;
  for (Node i = 0; i < n; ++i) {
    const auto& nb = g.neighbors(i);
    const std::size_t k = nb.size();
    if (k < 2) continue;
    for (Node j : nb) mark[j] = 1;
    std::int64_t links = 0;
    for (Node j : nb) {
      for (Node l : g.neighbors(j)) links += mark[l];
    }
    for (Node j : nb) mark[j] = 0;
    // each triangle edge among neighbors is counted twice
    sum += static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  return sum / static_cast<double>(n);
}

void JointDegreeMatrix::add(int k1, int k2, std::int64_t count) {
  if (k1 > k2) std::swap(k1, k2);
  auto& slot = counts_[{k1, k2}];
  slot += count;
  if (slot == 0) counts_.erase({k1, k2});
}

std::int64_t JointDegreeMatrix::at(int k1, int k2) const {
  if (k1 > k2) std::swap(k1, k2);
  auto it = counts_.find({k1, k2});
  return it == counts_.end() ? 0 : it->second;
}

std::int64_t JointDegreeMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& [key, c] : counts_) t += c;
  return t;
}

JointDegreeMatrix joint_degree_matrix(const Graph& g) {
  JointDegreeMatrix j;
  const auto& k = g.degrees();
  for (const Edge& e : g.edges()) j.add(k[e.u], k[e.v]);
  return j;
}

double FluxMatrix::total() const {
  double t = 0.0;
  for (const auto& [key, v] : values) t += v;
  return t;
}

double FluxMatrix::l1_norm() const {
  double t = 0.0;
  for (const auto& [key, v] : values) t += std::abs(v);
  return t;
}

FluxMatrix windowed_flux(std::span<const JdmTrajectory> trajectories, std::size_t t, std::size_t window) {
  if (trajectories.empty()) throw Error(ErrorKind::InvalidArgument, "flux of an empty trajectory set");
  if (window < 1) throw Error(ErrorKind::InvalidArgument, "flux window must be >= 1");
  std::map<DegreePair, double> acc;
  for (const auto& traj : trajectories) {
    if (traj.size() <= t + window) throw Error(ErrorKind::InvalidArgument, "trajectory shorter than t + window + 1");
    const auto& before = traj[t].counts();
    const auto& after = traj[t + window].counts();
    for (const auto& [key, c] : after) acc[key] += static_cast<double>(c);
    for (const auto& [key, c] : before) acc[key] -= static_cast<double>(c);
  }
  FluxMatrix f;
  f.t = t;
  f.num_runs = trajectories.size();
  const double scale = 1.0 / (static_cast<double>(trajectories.size()) * static_cast<double>(window));
  for (const auto& [key, v] : acc) {
    if (v != 0.0) f.values[key] = v * scale;
  }
  return f;
}

FluxMatrix flux(std::span<const JdmTrajectory> trajectories, std::size_t t) {
  return windowed_flux(trajectories, t, 1);
}

void EnsembleRecord::add_sample(const Graph& g, double rho, double c) {
  if (num_samples == 0 && num_edges == 0) num_edges = g.num_edges();
  if (g.num_edges() != num_edges) throw Error(ErrorKind::InvalidArgument, "ensemble samples must share E");
  rho_samples.push_back(rho);
  clustering_samples.push_back(c);
  for (const Edge& e : g.edges()) ++edge_presence[edge_key(e.u, e.v)];
  ++num_samples;
}

void EnsembleRecord::merge(const EnsembleRecord& other) {
  if (other.num_samples == 0) return;
  if (num_samples == 0) {
    num_edges = other.num_edges;
  } else if (num_edges != other.num_edges) {
    throw Error(ErrorKind::InvalidArgument, "cannot merge records with different E");
  }
  rho_samples.insert(rho_samples.end(), other.rho_samples.begin(), other.rho_samples.end());
  clustering_samples.insert(clustering_samples.end(), other.clustering_samples.begin(),
                            other.clustering_samples.end());
  for (const auto& [key, c] : other.edge_presence) edge_presence[key] += c;
  num_samples += other.num_samples;
}

double dyad_entropy(const EnsembleRecord& rec) {
  if (rec.num_samples == 0 || rec.num_edges == 0) {
    throw Error(ErrorKind::InvalidArgument, "dyad entropy needs at least one sample with E >= 1");
  }
  // Pairs never observed have p = 0 and contribute nothing. Summing in key
  // order keeps the result independent of hash-table iteration order.
  std::vector<std::pair<std::uint64_t, std::uint32_t>> items(rec.edge_presence.begin(), rec.edge_presence.end());
  std::sort(items.begin(), items.end());
  const double n = static_cast<double>(rec.num_samples);
  double sum = 0.0;
  for (const auto& [key, count] : items) {
    const double p = static_cast<double>(count) / n;
    if (p > 0.0 && p < 1.0) sum += p * std::log(p) + (1.0 - p) * std::log1p(-p);
  }
  return -2.0 / static_cast<double>(rec.num_edges) * sum;
}

EnsembleStats ensemble_stats(const EnsembleRecord& rec) {
  const std::size_t n = rec.rho_samples.size();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "ensemble_stats needs >= 2 samples");
  EnsembleStats s;
  for (double r : rec.rho_samples) s.mean_rho += r;
  s.mean_rho /= static_cast<double>(n);
  double var = 0.0;
  for (double r : rec.rho_samples) var += (r - s.mean_rho) * (r - s.mean_rho);
  s.sigma_rho = std::sqrt(var / static_cast<double>(n));
  if (!rec.clustering_samples.empty()) {
    for (double c : rec.clustering_samples) s.mean_c += c;
    s.mean_c /= static_cast<double>(rec.clustering_samples.size());
  }
  return s;
}

FeasibleRange feasible_range(const Graph& g, Seed seed, std::size_t attempts_per_edge,
                             std::vector<double>* max_trace) {
  const auto ctx = DegreeSequenceContext::of(g);
  if (g.num_edges() == 0 || ctx.degenerate()) throw Error(ErrorKind::Degenerate, "feasible range undefined");
  const std::size_t attempts = attempts_per_edge * g.num_edges();
  FeasibleRange out;
  for (int direction : {+1, -1}) {
    Graph work = g;
    Rng rng = make_rng(derive_seed(seed, direction > 0 ? 0 : 1));
    std::int64_t k = k_sum(work);
    if (direction > 0 && max_trace) {
      max_trace->clear();
      max_trace->reserve(attempts + 1);
      max_trace->push_back(assortativity_from_k(k, ctx.num_edges, ctx.mu, ctx.denom));
    }
    if (work.num_edges() >= 2) {
      for (std::size_t i = 0; i < attempts; ++i) {
        const RewiringAction a = random_action(work, rng);
        if (is_valid(work, a)) {
          const std::int64_t dk = delta_k_unchecked(work, a);
          if (direction * dk > 0) {
            apply_unchecked(work, a);
            k += dk;
          }
        }
        if (direction > 0 && max_trace) {
          max_trace->push_back(assortativity_from_k(k, ctx.num_edges, ctx.mu, ctx.denom));
        }
      }
    }
    const double rho = std::clamp(assortativity_from_k(k, ctx.num_edges, ctx.mu, ctx.denom), -1.0, 1.0);
    (direction > 0 ? out.rho_max : out.rho_min) = rho;
  }
  return out;
}

std::vector<std::int64_t> degree_histogram(const Graph& g) {
  std::vector<std::int64_t> h(static_cast<std::size_t>(g.max_degree()) + 1, 0);
  for (int k : g.degrees()) ++h[static_cast<std::size_t>(k)];
  return h;
}

namespace {

template <typename Map>
void write_dense(std::ostream& out, const Map& values) {
  std::set<int> classes;
  for (const auto& [key, v] : values) {
    classes.insert(key.first);
    classes.insert(key.second);
  }
  out << "k1,k2,value\n";
  char buf[64];
  for (int a : classes) {
    for (int b : classes) {
      auto it = values.find(a <= b ? DegreePair{a, b} : DegreePair{b, a});
      const double v = it == values.end() ? 0.0 : static_cast<double>(it->second);
      std::snprintf(buf, sizeof buf, "%.12g", v);
      out << a << ',' << b << ',' << buf << '\n';
    }
  }
}

}  // namespace

void write_jdm_csv(std::ostream& out, const JointDegreeMatrix& j) { write_dense(out, j.counts()); }
void write_flux_csv(std::ostream& out, const FluxMatrix& f) { write_dense(out, f.values); }

}  // namespace assortgen
