#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "assortgen/error.hpp"
#include "assortgen/graph.hpp"
#include "assortgen/network.hpp"
#include "assortgen/rewire.hpp"

namespace assortgen {

/// Boolean mask over the options of one sampling stage.
struct StageMask {
  std::vector<char> allowed;
  bool relaxed{false};  // true if the delta-K != 0 requirement was dropped

  std::size_t count() const;
  bool empty() const { return count() == 0; }
};

struct MaskConfig {
  bool exact{false};         // exact completion check for e1 (O(E^2) worst case)
  std::size_t probes{32};    // partner edges probed per e1 in sampled mode
};

/// Stage e1: edges that take part in at least one admissible completion.
/// Throws FrozenGraph if no valid rewiring is found at all.
StageMask mask_first(const Graph& g, const MaskConfig& cfg, Rng& rng);
/// Stage e2 given e1: partners with at least one admissible mode.
StageMask mask_second(const Graph& g, std::size_t e1);
/// Stage b given (e1, e2): admissible modes.
StageMask mask_mode(const Graph& g, std::size_t e1, std::size_t e2);

struct Choice {
  std::size_t index{0};
  double log_prob{0.0};
};

/// Log-softmax restricted to allowed entries; masked entries get -inf.
std::vector<double> masked_log_softmax(std::span<const double> scores, std::span<const char> allowed);

/// Draws from the renormalized softmax (or takes the first argmax when
/// greedy). Throws InvalidAction on an empty mask.
Choice sample_masked(std::span<const double> scores, std::span<const char> allowed, Rng& rng, bool greedy);

struct SampledAction {
  RewiringAction action;
  double log_prob{0.0};  // log pi1 + log pi2 + log pib
  StageMask mask1, mask2, mask_b;
};

/// Samples e1, then e2 given e1, then the mode, each from its masked head.
SampledAction sample_action(PolicyEval& heads, const Graph& g, const MaskConfig& cfg, Rng& rng, bool greedy);

/// Convenience: full forward + sampling for one state.
SampledAction policy_act(const PolicyParams& params, const Graph& g, int sign, const MaskConfig& cfg, Rng& rng,
                         bool greedy);

/// Effective tolerance max(epsilon, 2 / (E var_k)). Throws Degenerate if
/// var_k <= 0 and InvalidArgument if E == 0.
double epsilon_phys(double epsilon, std::size_t num_edges, double var_k);

/// Draws pool_size random valid actions and returns the one maximizing
/// sgn(rho* - rho) * delta K (first sampled wins ties). Throws FrozenGraph.
RewiringAction greedy_step(const Graph& g, double rho, double rho_target, std::size_t pool_size, Rng& rng);

/// A uniformly random valid action. Throws FrozenGraph.
RewiringAction random_valid_action(const Graph& g, Rng& rng);

struct RewardConfig {
  double zeta{0.005};
  double step_penalty{0.001};
  double success_bonus{100.0};
  double gamma{0.997};

  void validate() const;
};

struct EpisodeConfig {
  double rho_target{0.0};
  double epsilon{0.005};
  std::size_t step_cap{1};
  RewardConfig reward{};

  void validate() const;
};

enum class ActorKind { Policy, Greedy, Random };

struct Actor {
  ActorKind kind{ActorKind::Greedy};
  const PolicyParams* params{nullptr};  // required for ActorKind::Policy
  MaskConfig mask{};
  std::size_t pool_size{64};            // greedy pool
  bool deterministic{false};            // argmax sampling for the policy
};

struct EpisodeResult {
  Graph final_graph;
  std::size_t steps{0};        // applied rewirings T
  bool success{false};
  std::vector<double> trace;   // rho before the first step, then after each step
  double eps_phys{0.0};
  std::optional<ErrorKind> failure;  // set when the episode stopped on an error
};

/// One action of `actor` in state g with current assortativity rho.
/// Throws FrozenGraph.
RewiringAction actor_step(const Actor& actor, const Graph& g, double rho, double rho_target, Rng& rng);

/// Applies actor-chosen rewirings until |rho - rho*| <= eps_phys or the step
/// cap. A frozen graph ends the episode as a failure with the partial trace.
EpisodeResult run_episode(const Graph& g, const EpisodeConfig& cfg, const Actor& actor, Seed seed);

/// Steps between full recomputations of rho inside an episode.
inline constexpr std::size_t kDriftCheckInterval = 10000;

}  // namespace assortgen
