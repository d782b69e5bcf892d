#include <cmath>
#include <string>

#include "assortgen/metrics.hpp"
#include "assortgen/policy.hpp"

namespace assortgen {

RewiringAction actor_step(const Actor& actor, const Graph& g, double rho, double rho_target, Rng& rng) {
  switch (actor.kind) {
    case ActorKind::Greedy:
      return greedy_step(g, rho, rho_target, actor.pool_size, rng);
    case ActorKind::Random:
      return random_valid_action(g, rng);
    case ActorKind::Policy:
      if (actor.params == nullptr) throw Error(ErrorKind::InvalidArgument, "policy actor without parameters");
      return policy_act(*actor.params, g, rho_target > rho ? 1 : -1, actor.mask, rng, actor.deterministic).action;
  }
  throw Error(ErrorKind::Internal, "unknown actor kind");
}

EpisodeResult run_episode(const Graph& g, const EpisodeConfig& cfg, const Actor& actor, Seed seed) {
  cfg.validate();
  if (actor.kind == ActorKind::Policy && actor.params == nullptr) {
    throw Error(ErrorKind::InvalidArgument, "policy actor without parameters");
  }
  EpisodeResult out;
  out.final_graph = g;
  Graph& cur = out.final_graph;
  const DegreeSequenceContext ctx = DegreeSequenceContext::of(cur);
  if (cur.num_edges() == 0 || ctx.degenerate()) throw Error(ErrorKind::Degenerate, "episode on degenerate graph");
  out.eps_phys = epsilon_phys(cfg.epsilon, cur.num_edges(), ctx.var_k);
  Rng rng = make_rng(seed);

  std::int64_t k = k_sum(cur);
  double rho = assortativity_from_k(k, ctx.num_edges, ctx.mu, ctx.denom);
  out.trace.push_back(rho);
  auto done = [&] { return std::abs(rho - cfg.rho_target) <= out.eps_phys; };

  while (!done() && out.steps < cfg.step_cap) {
    RewiringAction a;
    try {
      a = actor_step(actor, cur, rho, cfg.rho_target, rng);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FrozenGraph) throw;
      out.failure = e.kind();
      return out;
    }
    k += delta_k_unchecked(cur, a);
    apply_unchecked(cur, a);
    ++out.steps;
    rho = assortativity_from_k(k, ctx.num_edges, ctx.mu, ctx.denom);
    out.trace.push_back(rho);
    if (out.steps % kDriftCheckInterval == 0) {
      const double full = assortativity(cur);
      if (std::abs(full - rho) > 1e-8) {
        throw Error(ErrorKind::Internal, "incremental assortativity drifted by " + std::to_string(full - rho));
      }
    }
  }
  out.success = done();
  return out;
}

}  // namespace assortgen
