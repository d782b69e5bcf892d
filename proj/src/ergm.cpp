#include "assortgen/ergm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "assortgen/metrics.hpp"

namespace assortgen {

ChainState::ChainState(Graph g) : graph(std::move(g)), ctx(DegreeSequenceContext::of(graph)), k(k_sum(graph)) {
  if (graph.num_edges() == 0 || ctx.degenerate()) throw Error(ErrorKind::Degenerate, "chain on degenerate degree sequence");
}

double ChainState::rho() const { return assortativity_from_k(k, ctx.num_edges, ctx.mu, ctx.denom); }

double mh_acceptance(double lambda, std::int64_t dk) {
  const double x = lambda * static_cast<double>(dk);
  return x >= 0.0 ? 1.0 : std::exp(x);
}

MHStep mh_step(ChainState& state, double lambda, Rng& rng) {
  Graph& g = state.graph;
  if (g.num_edges() < 2) throw Error(ErrorKind::Exhausted, "fewer than two edges");
  const RewiringAction a = random_action(g, rng);
  if (!is_valid(g, a)) {
    if (++state.consecutive_invalid >= kInvalidProposalCap) {
      throw Error(ErrorKind::Exhausted, std::to_string(kInvalidProposalCap) + " consecutive invalid proposals");
    }
    return {false, state.rho()};
  }
  state.consecutive_invalid = 0;
  const std::int64_t dk = delta_k_unchecked(g, a);
  const double x = lambda * static_cast<double>(dk);
  const bool accept = x >= 0.0 || uniform01(rng) < std::exp(x);
  if (accept) {
    apply_unchecked(g, a);
    state.k += dk;
  }
  return {accept, state.rho()};
}

namespace {

std::size_t tail_start_of(std::size_t len, const TransientConfig& cfg) {
  if (len == 0) throw Error(ErrorKind::NotConverged, "empty trajectory");
  const auto start = static_cast<std::size_t>(std::floor(static_cast<double>(len) * (1.0 - cfg.tail_fraction)));
  if (start >= len) throw Error(ErrorKind::NotConverged, "empty steady-state window");
  return start;
}

}  // namespace

std::size_t transient_time(std::span<const double> rho, const TransientConfig& cfg) {
  const std::size_t len = rho.size();
  const std::size_t tail_start = tail_start_of(len, cfg);
  const std::size_t tail_len = len - tail_start;
  double mean = 0.0;
  for (std::size_t i = tail_start; i < len; ++i) mean += rho[i];
  mean /= static_cast<double>(tail_len);
  double var = 0.0;
  for (std::size_t i = tail_start; i < len; ++i) var += (rho[i] - mean) * (rho[i] - mean);
  return transient_time(rho, std::sqrt(var / static_cast<double>(tail_len)), cfg);
}

std::size_t transient_time(std::span<const double> rho, double steady_sd, const TransientConfig& cfg) {
  const std::size_t len = rho.size();
  const std::size_t tail_start = tail_start_of(len, cfg);
  double mean = 0.0;
  for (std::size_t i = tail_start; i < len; ++i) mean += rho[i];
  mean /= static_cast<double>(len - tail_start);
  const double half_band = cfg.band_sigmas * steady_sd + 1e-12 * std::max(1.0, std::abs(mean));

  const std::size_t window = std::max(cfg.min_window, len / std::max<std::size_t>(1, cfg.window_divisor));
  const std::size_t half = window / 2;
  std::vector<double> prefix(len + 1, 0.0);
  for (std::size_t i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + (rho[i] - mean);

  std::size_t settle = 0;
  for (std::size_t i = len; i-- > 0;) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(len, i + half + 1);
    const double smoothed = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    if (std::abs(smoothed) > half_band) {
      settle = i + 1;
      break;
    }
  }
  if (settle > tail_start) {
    throw Error(ErrorKind::NotConverged, "smoothed trace leaves the steady-state band at step " + std::to_string(settle - 1));
  }
  return settle;
}

std::size_t transient_time(const Trajectory& traj, const TransientConfig& cfg) {
  return transient_time(std::span<const double>(traj.rho_per_step), cfg);
}

ChainResult run_chain(const Graph& g, const MHConfig& cfg, const TransientConfig& tcfg) {
  if (cfg.max_steps < 1 || cfg.sample_interval < 1) {
    throw Error(ErrorKind::InvalidArgument, "max_steps and sample_interval must be >= 1");
  }
  ChainState state(g);
  Rng rng = make_rng(cfg.seed);
  ChainResult out;
  auto& traj = out.trajectory;
  traj.rho_per_step.reserve(cfg.max_steps);
  std::vector<std::vector<Edge>> snapshots;
  std::vector<std::size_t> snapshot_steps;
  for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
    const MHStep s = mh_step(state, cfg.lambda, rng);
    traj.rho_per_step.push_back(s.rho);
    traj.accepted_count += s.accepted ? 1 : 0;
    if (step % cfg.sample_interval == 0) {
      snapshots.push_back(state.graph.edges());
      snapshot_steps.push_back(step);
    }
  }
  try {
    out.transient = transient_time(traj, tcfg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotConverged) throw;
  }
  if (out.transient) {
    for (std::size_t i = 0; i < snapshots.size(); ++i) {
      if (snapshot_steps[i] >= *out.transient) {
        out.samples.push_back(Graph::from_edge_list(g.num_nodes(), std::span<const Edge>(snapshots[i])));
        out.sample_steps.push_back(snapshot_steps[i]);
      }
    }
  }
  out.final_graph = std::move(state.graph);
  return out;
}

namespace {

struct PilotStats {
  double mean{0.0};
  double var{0.0};
};

// Runs `steps` proposals and summarizes the second half.
PilotStats run_pilot(ChainState& state, double lambda, std::size_t steps, Rng& rng) {
  const std::size_t skip = steps / 2;
  double sum = 0.0;
  double sum2 = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double r = mh_step(state, lambda, rng).rho;
    if (i >= skip) {
      sum += r;
      sum2 += r * r;
      ++count;
    }
  }
  PilotStats p;
  p.mean = sum / static_cast<double>(count);
  p.var = std::max(0.0, sum2 / static_cast<double>(count) - p.mean * p.mean);
  return p;
}

}  // namespace

TuneResult tune_lambda(const Graph& g, double rho_target, Seed seed, const TuneConfig& cfg) {
  if (rho_target < -1.0 || rho_target > 1.0) throw Error(ErrorKind::Infeasible, "target outside [-1, 1]");
  if (cfg.check_feasible) {
    const FeasibleRange fr = feasible_range(g, derive_seed(seed, 0xfea5));
    const double margin = cfg.feasible_margin * 0.5 * (fr.rho_max - fr.rho_min);
    if (rho_target < fr.rho_min + margin || rho_target > fr.rho_max - margin) {
      throw Error(ErrorKind::Infeasible, "target " + std::to_string(rho_target) + " outside feasible range [" +
                                             std::to_string(fr.rho_min) + ", " + std::to_string(fr.rho_max) + "]");
    }
  }
  ChainState state(g);
  Rng rng = make_rng(seed);
  const std::size_t e = g.num_edges();
  const std::size_t pilot_steps = std::max<std::size_t>(2, cfg.pilot_steps_per_edge * e);
  const std::size_t verify_steps = std::max<std::size_t>(2, cfg.verify_steps_per_edge * e);
  const double scale = static_cast<double>(e) * state.ctx.denom;

  TuneResult result;
  double lambda = 0.0;
  double slope_floor = 0.0;
  double best_lambda = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  std::size_t settled = 0;
  for (std::size_t n = 0; n < cfg.max_iterations; ++n) {
    // pilots lengthen while unsettled so their noise drops below the tolerance on small graphs
    const std::size_t stretch = std::size_t{1} << std::min<std::size_t>(4, n / 50);
    const PilotStats p = run_pilot(state, lambda, stretch * pilot_steps, rng);
    result.log.push_back({n, lambda, p.mean});
    double slope = scale * p.var;  // d<rho>/d lambda = E D Var(rho)
    if (n == 0) {
      if (!(slope > 0.0)) throw TuneError("no assortativity fluctuations at lambda = 0", 0.0);
      slope_floor = 0.05 * slope;
    }
    slope = std::max(slope, slope_floor);
    double err = rho_target - p.mean;
    if (std::abs(err) < best_err) {
      best_err = std::abs(err);
      best_lambda = lambda;
    }
    settled = std::abs(err) <= cfg.tolerance ? settled + 1 : 0;
    if (settled >= cfg.settle_iterations) {
      const PilotStats v = run_pilot(state, lambda, 2 * stretch * verify_steps, rng);
      if (std::abs(rho_target - v.mean) <= cfg.tolerance) {
        result.lambda = lambda;
        result.rho_hat = v.mean;
        result.slope = std::max(scale * v.var, slope_floor);
        result.equilibrated = state.graph;
        return result;
      }
      settled = 0;
      err = rho_target - v.mean;
    }
    const double step = cfg.gain / (slope * (1.0 + static_cast<double>(n) / cfg.decay_iterations));
    lambda += step * err;
  }
  throw TuneError("lambda tuning did not reach tolerance " + std::to_string(cfg.tolerance) +
                      " (best lambda " + std::to_string(best_lambda) + ")",
                  best_lambda);
}

}  // namespace assortgen
