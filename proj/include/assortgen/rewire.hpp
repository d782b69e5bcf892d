#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "assortgen/graph.hpp"

namespace assortgen {

/// Degree-preserving rewiring of edge slots e1 = (u,v), e2 = (x,y).
/// mode 0 produces {(u,x),(v,y)}; mode 1 produces {(u,y),(v,x)}.
struct RewiringAction {
  std::size_t e1{0};
  std::size_t e2{0};
  int mode{0};

  friend bool operator==(const RewiringAction&, const RewiringAction&) = default;
};

/// Quantities of Pearson assortativity that depend only on the degree
/// sequence and are therefore constant under rewiring.
struct DegreeSequenceContext {
  std::size_t num_edges{0};
  double mu{0.0};     // mean endpoint degree over edges
  double denom{0.0};  // endpoint-degree variance over edges
  double var_k{0.0};  // variance of node degrees

  static DegreeSequenceContext of(const Graph& g);
  bool degenerate() const { return !(denom > 0.0); }
};

/// Edges produced by pairing a = (u,v) with b = (x,y) under `mode`.
std::pair<Edge, Edge> pair_for_mode(Edge a, Edge b, int mode);

/// The two edges an action would create (unvalidated).
std::pair<Edge, Edge> rewired_pair(const Graph& g, const RewiringAction& a);

bool is_valid(const Graph& g, const RewiringAction& a);

/// Change in K = sum over edges of k_i k_j. Throws InvalidAction.
std::int64_t delta_k(const Graph& g, const RewiringAction& a);

/// delta_k without the validity check. Indices must be in range.
std::int64_t delta_k_unchecked(const Graph& g, const RewiringAction& a);

/// Change in assortativity implied by a K change. Throws Degenerate.
double delta_rho(const DegreeSequenceContext& ctx, std::int64_t dk);

/// Applies a valid action in place. Throws InvalidAction and leaves g
/// untouched otherwise.
void apply(Graph& g, const RewiringAction& a);

/// Applies without validation.
void apply_unchecked(Graph& g, const RewiringAction& a);

/// Action that undoes `a` once `a` has been applied (same slots).
RewiringAction inverse(const Graph& g_before, const RewiringAction& a);

/// Uniformly random ordered pair of distinct slots and a uniform mode.
RewiringAction random_action(const Graph& g, Rng& rng);

}  // namespace assortgen
