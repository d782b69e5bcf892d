#include "assortgen/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "assortgen/checkpoint.hpp"
#include "assortgen/metrics.hpp"
#include "assortgen/parallel.hpp"

namespace assortgen {

void DomainSampler::validate() const {
  if (families.empty() || n_min < 4 || n_max < n_min || !(k_min > 0.0) || k_max < k_min || rho_max < rho_min ||
      rho_min < -1.0 || rho_max > 1.0 || !(epsilon > 0.0) || target_margin < 0.0 || target_margin >= 1.0 ||
      rho_abs_min < 0.0 || rho_abs_min > std::max(std::abs(rho_min), std::abs(rho_max))) {
    throw Error(ErrorKind::InvalidArgument, "invalid training domain");
  }
}

void TrainConfig::validate() const {
  reward.validate();
  domain.validate();
  if (rollout_steps < 1 || ppo.epochs < 1 || ppo.minibatch < 1 || !(ppo.clip > 0.0) || ppo.learning_rate < 0.0 ||
      ppo.gae_lambda < 0.0 || ppo.gae_lambda > 1.0 || step_cap_per_edge < 1 || num_envs < 1 || num_envs > rollout_steps ||
      eval_interval < 1 || probe_episodes < 1 || arch.hidden < 1 || arch.layers < 0) {
    throw Error(ErrorKind::InvalidArgument, "invalid training configuration");
  }
}

nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json fams = nlohmann::json::array();
  for (Family f : c.domain.families) fams.push_back(std::string(to_string(f)));
  return {{"reward",
           {{"zeta", c.reward.zeta},
            {"step_penalty", c.reward.step_penalty},
            {"success_bonus", c.reward.success_bonus},
            {"gamma", c.reward.gamma}}},
          {"ppo",
           {{"clip", c.ppo.clip},
            {"learning_rate", c.ppo.learning_rate},
            {"epochs", c.ppo.epochs},
            {"minibatch", c.ppo.minibatch},
            {"gae_lambda", c.ppo.gae_lambda},
            {"entropy_coef", c.ppo.entropy_coef},
            {"value_coef", c.ppo.value_coef},
            {"max_grad_norm", c.ppo.max_grad_norm}}},
          {"mask", {{"exact", c.mask.exact}, {"probes", c.mask.probes}}},
          {"domain",
           {{"families", fams},
            {"n_min", c.domain.n_min},
            {"n_max", c.domain.n_max},
            {"k_min", c.domain.k_min},
            {"k_max", c.domain.k_max},
            {"rho_min", c.domain.rho_min},
            {"rho_max", c.domain.rho_max},
            {"rho_abs_min", c.domain.rho_abs_min},
            {"epsilon", c.domain.epsilon},
            {"target_margin", c.domain.target_margin}}},
          {"rollout_steps", c.rollout_steps},
          {"total_steps", c.total_steps},
          {"step_cap_per_edge", c.step_cap_per_edge},
          {"num_envs", c.num_envs},
          {"eval_interval", c.eval_interval},
          {"probe_episodes", c.probe_episodes},
          {"stop_success_rate", c.stop_success_rate},
          {"divergence_steps", c.divergence_steps},
          {"terminate_on_success", true},
          {"seed", c.seed.value}};
}

EpisodeSpec sample_episode(const DomainSampler& domain, Seed seed) {
  Rng rng = make_rng(seed);
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    ModelSpec spec;
    spec.family = domain.families[uniform_index(rng, domain.families.size())];
    spec.n = domain.n_min + uniform_index(rng, domain.n_max - domain.n_min + 1);
    spec.mean_degree = std::uniform_real_distribution<double>(domain.k_min, domain.k_max)(rng);
    Graph g = generate(spec, derive_seed(seed, 2 * attempt + 1));
    const DegreeSequenceContext ctx = DegreeSequenceContext::of(g);
    if (g.num_edges() < 2 || ctx.degenerate() || !(ctx.var_k > 0.0)) continue;

    const FeasibleRange fr = feasible_range(g, derive_seed(seed, 2 * attempt + 2));
    const double margin = domain.target_margin * 0.5 * (fr.rho_max - fr.rho_min);
    const double lo = std::max(domain.rho_min, fr.rho_min + margin);
    const double hi = std::min(domain.rho_max, fr.rho_max - margin);
    if (!(lo < hi)) continue;
    double target = 0.0;
    for (int i = 0; i < 1000; ++i) {
      target = std::uniform_real_distribution<double>(domain.rho_min, domain.rho_max)(rng);
      if (std::abs(target) >= domain.rho_abs_min) break;
    }
    return EpisodeSpec{std::move(g), std::clamp(target, lo, hi)};
  }
  throw Error(ErrorKind::Degenerate, "could not sample a non-degenerate training graph");
}

std::vector<EpisodeSpec> make_probe_set(const DomainSampler& domain, std::size_t count, Seed seed) {
  std::vector<EpisodeSpec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_episode(domain, derive_seed(seed, i)));
  return out;
}

ProbeStats evaluate_probes(const std::vector<EpisodeSpec>& probes, const Actor& actor, double epsilon,
                           std::size_t step_cap_per_edge, Seed seed, std::size_t threads) {
  std::vector<EpisodeResult> res(probes.size());
  parallel_for(probes.size(), threads, [&](std::size_t i) {
    EpisodeConfig ec;
    ec.rho_target = probes[i].rho_target;
    ec.epsilon = epsilon;
    ec.step_cap = step_cap_per_edge * probes[i].graph.num_edges();
    res[i] = run_episode(probes[i].graph, ec, actor, derive_seed(seed, i));
  });
  ProbeStats s;
  for (const auto& r : res) {
    s.success_rate += r.success ? 1.0 : 0.0;
    s.mean_t += static_cast<double>(r.steps);
  }
  if (!res.empty()) {
    s.success_rate /= static_cast<double>(res.size());
    s.mean_t /= static_cast<double>(res.size());
  }
  return s;
}

namespace {

struct RolloutStats {
  double reward_sum{0.0};
  std::size_t episodes{0};
  std::size_t successes{0};
  std::size_t steps_sum{0};
};

// One training environment. Episodes persist across rollout segments.
class Env {
public:
  Env(const TrainConfig& cfg, Seed seed) : cfg_(cfg), seed_(seed) { reset(); }

  // Collects `steps` transitions; advantages are filled in place.
  void collect(const PolicyParams& params, std::size_t steps, std::vector<Transition>& out, RolloutStats& stats) {
    std::vector<Transition> seg;
    std::vector<char> ends;
    std::vector<double> boot;
    while (seg.size() < steps) {
      const int sign = target_ > rho_ ? 1 : -1;
      const GraphView view = GraphView::of(g_);
      PolicyEval heads(params, view, sign);
      SampledAction sa;
      try {
        sa = sample_action(heads, g_, cfg_.mask, rng_, false);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::FrozenGraph) throw;
        if (!seg.empty() && !ends.back()) {
          ends.back() = 1;
          boot.back() = 0.0;
        }
        finish(stats, false);
        continue;
      }
      Transition t;
      t.num_nodes = g_.num_nodes();
      t.edges = g_.edges();
      t.degrees = g_.degrees();
      t.max_degree = g_.max_degree();
      t.sign = sign;
      t.gap = target_ - rho_;
      t.action = sa.action;
      t.mask1 = std::move(sa.mask1.allowed);
      t.mask2 = std::move(sa.mask2.allowed);
      t.mask_b = {sa.mask_b.allowed[0], sa.mask_b.allowed[1]};
      t.log_prob = sa.log_prob;
      t.value = ValueEval(params, view, t.gap).value();

      k_ += delta_k_unchecked(g_, sa.action);
      apply_unchecked(g_, sa.action);
      ++steps_;
      const double rho_new = assortativity_from_k(k_, ctx_.num_edges, ctx_.mu, ctx_.denom);
      t.reward = reward(rho_, rho_new, target_, cfg_.reward, eps_);
      rho_ = rho_new;
      stats.reward_sum += t.reward;
      seg.push_back(std::move(t));
      if (in_window()) {
        ends.push_back(1);
        boot.push_back(0.0);
        finish(stats, true);
      } else if (steps_ >= cap_) {
        ends.push_back(1);
        boot.push_back(value(params));
        finish(stats, false);
      } else {
        ends.push_back(0);
        boot.push_back(0.0);
      }
    }
    const double tail = ends.back() ? 0.0 : value(params);
    double acc = 0.0;
    for (std::size_t i = seg.size(); i-- > 0;) {
      const bool last = i + 1 == seg.size();
      const double next = ends[i] ? boot[i] : (last ? tail : seg[i + 1].value);
      const double delta = seg[i].reward + cfg_.reward.gamma * next - seg[i].value;
      acc = delta + ((ends[i] || last) ? 0.0 : cfg_.reward.gamma * cfg_.ppo.gae_lambda * acc);
      seg[i].advantage = acc;
      seg[i].ret = acc + seg[i].value;
    }
    for (auto& t : seg) out.push_back(std::move(t));
  }

private:
  bool in_window() const { return std::abs(rho_ - target_) <= eps_; }
  double value(const PolicyParams& params) const {
    return ValueEval(params, GraphView::of(g_), target_ - rho_).value();
  }
  void finish(RolloutStats& stats, bool success) {
    ++stats.episodes;
    stats.successes += success ? 1 : 0;
    stats.steps_sum += steps_;
    reset();
  }
  void reset() {
    // Episodes that start inside the window carry no transitions; redraw.
    do {
      EpisodeSpec spec = sample_episode(cfg_.domain, derive_seed(seed_, episode_++));
      g_ = std::move(spec.graph);
      target_ = spec.rho_target;
      ctx_ = DegreeSequenceContext::of(g_);
      eps_ = epsilon_phys(cfg_.domain.epsilon, g_.num_edges(), ctx_.var_k);
      cap_ = cfg_.step_cap_per_edge * g_.num_edges();
      k_ = k_sum(g_);
      rho_ = assortativity_from_k(k_, ctx_.num_edges, ctx_.mu, ctx_.denom);
      rng_ = make_rng(derive_seed(seed_, episode_++));
      steps_ = 0;
    } while (in_window());
  }

  const TrainConfig& cfg_;
  Seed seed_;
  std::uint64_t episode_{0};
  Graph g_;
  double target_{0.0};
  DegreeSequenceContext ctx_{};
  double eps_{0.0};
  std::size_t cap_{0};
  std::int64_t k_{0};
  double rho_{0.0};
  Rng rng_;
  std::size_t steps_{0};
};

}  // namespace

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& curve) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << "env_steps,mean_reward,success_rate,mean_T,kl,clip_frac\n";
  char buf[256];
  for (const auto& r : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.env_steps, r.mean_reward,
                  r.success_rate, r.mean_t, r.kl, r.clip_frac);
    out << buf;
  }
}

TrainResult train(const TrainConfig& cfg, const std::function<void(const CurveRow&)>& progress) {
  cfg.validate();
  TrainResult result;
  result.params = PolicyParams::initialize(cfg.arch, derive_seed(cfg.seed, 1));
  PolicyParams& params = result.params;
  const std::vector<EpisodeSpec> probes = make_probe_set(cfg.domain, cfg.probe_episodes, derive_seed(cfg.seed, 2));
  AdamState adam;
  Rng update_rng = make_rng(derive_seed(cfg.seed, 3));
  const Seed episode_seed = derive_seed(cfg.seed, 4);
  const Seed probe_seed = derive_seed(cfg.seed, 5);

  auto save = [&] {
    if (cfg.out_dir.empty()) return;
    std::filesystem::create_directories(cfg.out_dir);
    save_checkpoint((std::filesystem::path(cfg.out_dir) / "checkpoint").string(),
                    Checkpoint{params, to_json(cfg), cfg.seed});
    write_curve_csv((std::filesystem::path(cfg.out_dir) / "training_curve.csv").string(), result.curve);
  };

  std::vector<Env> envs;
  for (std::size_t i = 0; i < cfg.num_envs; ++i) envs.emplace_back(cfg, derive_seed(episode_seed, i));
  std::size_t updates = 0;
  double best_success = 0.0;
  while (result.env_steps < cfg.total_steps) {
    const std::size_t want = std::min(cfg.rollout_steps, cfg.total_steps - result.env_steps);
    std::vector<std::vector<Transition>> parts(envs.size());
    std::vector<RolloutStats> stats(envs.size());
    parallel_for(envs.size(), cfg.threads, [&](std::size_t i) {
      const std::size_t lo = want * i / envs.size();
      const std::size_t hi = want * (i + 1) / envs.size();
      if (hi > lo) envs[i].collect(params, hi - lo, parts[i], stats[i]);
    });
    std::vector<Transition> batch;
    double reward_sum = 0.0;
    for (std::size_t i = 0; i < envs.size(); ++i) {
      reward_sum += stats[i].reward_sum;
      for (auto& t : parts[i]) batch.push_back(std::move(t));
    }
    result.env_steps += batch.size();
    if (batch.empty()) break;
    const PPODiagnostics diag = ppo_update(params, adam, batch, cfg.ppo, update_rng, cfg.threads);
    ++updates;

    const bool last = result.env_steps >= cfg.total_steps;
    if (updates % cfg.eval_interval == 0 || last) {
      const Actor actor{ActorKind::Policy, &params, cfg.mask};
      result.last_probe = evaluate_probes(probes, actor, cfg.domain.epsilon, cfg.step_cap_per_edge, probe_seed,
                                          cfg.threads);
      best_success = std::max(best_success, result.last_probe.success_rate);
      const CurveRow row{result.env_steps,
                         reward_sum / static_cast<double>(batch.size()),
                         result.last_probe.success_rate,
                         result.last_probe.mean_t,
                         diag.kl,
                         diag.clip_frac};
      result.curve.push_back(row);
      save();
      if (progress) progress(row);
      if (result.last_probe.success_rate >= cfg.stop_success_rate) break;
      if (result.env_steps >= cfg.divergence_steps && best_success == 0.0) {
        throw Error(ErrorKind::NotConverged, "training diverged: probe success still 0 after " +
                                                 std::to_string(result.env_steps) + " steps");
      }
    }
  }
  return result;
}

}  // namespace assortgen
