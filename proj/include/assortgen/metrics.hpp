#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "assortgen/graph.hpp"

namespace assortgen {

/// Pearson degree-degree correlation over edges. Throws Degenerate when the
/// endpoint-degree variance is zero (including E = 0).
double assortativity(const Graph& g);

/// K(G) = sum over edges of k_i k_j.
std::int64_t k_sum(const Graph& g);

/// Assortativity implied by a K value for the degree sequence of g.
double assortativity_from_k(std::int64_t k, std::size_t num_edges, double mu, double denom);

/// Mean local clustering; nodes of degree < 2 contribute 0.
double clustering(const Graph& g);

using DegreePair = std::pair<int, int>;

/// Edge counts between degree classes, keyed by (k1, k2) with k1 <= k2.
class JointDegreeMatrix {
public:
  JointDegreeMatrix() = default;

  void add(int k1, int k2, std::int64_t count = 1);
  /// Symmetric accessor.
  std::int64_t at(int k1, int k2) const;
  std::int64_t total() const;
  const std::map<DegreePair, std::int64_t>& counts() const noexcept { return counts_; }

  friend bool operator==(const JointDegreeMatrix&, const JointDegreeMatrix&) = default;

private:
  std::map<DegreePair, std::int64_t> counts_;
};

JointDegreeMatrix joint_degree_matrix(const Graph& g);

/// Expected per-step change of J between steps t and t+1.
struct FluxMatrix {
  std::map<DegreePair, double> values;
  std::size_t t{0};
  std::size_t num_runs{0};

  /// Sum over stored (k1 <= k2) entries; zero for edge-conserving dynamics.
  double total() const;
  double l1_norm() const;
};

using JdmTrajectory = std::vector<JointDegreeMatrix>;

/// Elementwise average of J(t+1) - J(t) across runs.
FluxMatrix flux(std::span<const JdmTrajectory> trajectories, std::size_t t);

/// Flux averaged over a window: (J(t+w) - J(t)) / w, averaged across runs.
FluxMatrix windowed_flux(std::span<const JdmTrajectory> trajectories, std::size_t t, std::size_t window);

/// Per-sample observables plus edge presence counts for p_ij estimation.
struct EnsembleRecord {
  std::vector<double> rho_samples;
  std::vector<double> clustering_samples;
  absl::flat_hash_map<std::uint64_t, std::uint32_t> edge_presence;
  std::size_t num_samples{0};
  std::size_t num_edges{0};

  void add_sample(const Graph& g, double rho, double c);
  /// Associative, commutative merge of two records over the same edge count.
  void merge(const EnsembleRecord& other);
};

/// S_DI = -(2/E) sum_{i<j} [p ln p + (1-p) ln(1-p)] with p estimated from
/// edge presence frequencies.
double dyad_entropy(const EnsembleRecord& rec);

struct EnsembleStats {
  double mean_rho{0.0};
  double sigma_rho{0.0};  // population standard deviation
  double mean_c{0.0};
};

/// Throws InvalidArgument with fewer than two samples.
EnsembleStats ensemble_stats(const EnsembleRecord& rec);

struct FeasibleRange {
  double rho_min{0.0};
  double rho_max{0.0};
};

/// Greedy hill climbs: `attempts_per_edge * E` proposals accepting only
/// assortativity-increasing (resp. decreasing) valid moves.
FeasibleRange feasible_range(const Graph& g, Seed seed, std::size_t attempts_per_edge = 50,
                             std::vector<double>* max_trace = nullptr);

/// Degree-class sizes n_k (index k).
std::vector<std::int64_t> degree_histogram(const Graph& g);

/// Dense CSV export "k1,k2,value" of the stored (k1 <= k2) entries.
void write_jdm_csv(std::ostream& out, const JointDegreeMatrix& j);
void write_flux_csv(std::ostream& out, const FluxMatrix& f);

}  // namespace assortgen
