#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "assortgen/error.hpp"
#include "assortgen/graph.hpp"
#include "assortgen/rewire.hpp"

namespace assortgen {

/// Metropolis-Hastings chain state: the graph plus the running K(G).
struct ChainState {
  Graph graph;
  DegreeSequenceContext ctx;
  std::int64_t k{0};
  std::size_t consecutive_invalid{0};

  explicit ChainState(Graph g);
  double rho() const;
};

struct MHStep {
  bool accepted{false};
  double rho{0.0};
};

/// Maximum number of consecutive invalid proposals before a chain is
/// declared frozen.
inline constexpr std::size_t kInvalidProposalCap = 1000;

/// Acceptance probability min(1, exp(lambda * dk)).
double mh_acceptance(double lambda, std::int64_t dk);

/// One proposal: a uniform (e1, e2, b). An invalid proposal is a rejection
/// (the state is unchanged) so the proposal kernel stays symmetric. Throws
/// Exhausted after kInvalidProposalCap consecutive invalid proposals.
MHStep mh_step(ChainState& state, double lambda, Rng& rng);

struct MHConfig {
  double lambda{0.0};
  std::size_t max_steps{1};
  std::size_t sample_interval{1};
  Seed seed{};
};

struct Trajectory {
  std::vector<double> rho_per_step;  // one entry per proposal
  std::size_t accepted_count{0};
};

struct TransientConfig {
  double band_sigmas{2.0};
  double tail_fraction{0.25};
  std::size_t min_window{100};
  std::size_t window_divisor{200};
};

/// First step after which the smoothed trace stays inside the steady-state
/// band. Throws NotConverged if the trace only settles inside the tail window
/// used to estimate the steady state.
std::size_t transient_time(const Trajectory& traj, const TransientConfig& cfg = {});
std::size_t transient_time(std::span<const double> rho, const TransientConfig& cfg = {});

/// Same rule on a run-averaged trace, with the band half-width taken from
/// the given single-chain steady-state standard deviation.
std::size_t transient_time(std::span<const double> mean_rho, double steady_sd, const TransientConfig& cfg = {});

struct ChainResult {
  Trajectory trajectory;
  std::vector<Graph> samples;  // snapshots taken at or after the transient
  std::vector<std::size_t> sample_steps;
  std::optional<std::size_t> transient;  // empty if detection failed
  Graph final_graph;
};

ChainResult run_chain(const Graph& g, const MHConfig& cfg, const TransientConfig& tcfg = {});

struct TuneConfig {
  double tolerance{0.01};
  std::size_t pilot_steps_per_edge{20};
  std::size_t verify_steps_per_edge{200};
  std::size_t max_iterations{300};
  double gain{1.0};
  double decay_iterations{20.0};  // n0 in a_n = a_0 / (1 + n / n0)
  std::size_t settle_iterations{3};
  double feasible_margin{0.1};  // fraction of the feasible half-width
  bool check_feasible{true};
};

struct TuneLogEntry {
  std::size_t iteration{0};
  double lambda{0.0};
  double rho_hat{0.0};
};

struct TuneResult {
  double lambda{0.0};
  double rho_hat{0.0};  // verification-chain mean
  double slope{0.0};    // d<rho>/d lambda estimate at the returned lambda
  std::vector<TuneLogEntry> log;
  Graph equilibrated;   // chain state after verification
};

/// Error carrying the best conjugate parameter found before giving up.
class TuneError : public Error {
public:
  TuneError(const std::string& what, double best_lambda)
      : Error(ErrorKind::NotConverged, what), best_lambda_(best_lambda) {}
  double best_lambda() const noexcept { return best_lambda_; }

private:
  double best_lambda_;
};

/// Robbins-Monro search for lambda such that the equilibrium mean
/// assortativity matches rho_target. Throws Infeasible or TuneError.
TuneResult tune_lambda(const Graph& g, double rho_target, Seed seed, const TuneConfig& cfg = {});

}  // namespace assortgen
