#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "assortgen/generators.hpp"
#include "assortgen/network.hpp"
#include "assortgen/policy.hpp"
#include "assortgen/ppo.hpp"

namespace assortgen {

/// Distribution of training (or probe) episodes.
struct DomainSampler {
  std::vector<Family> families{Family::WS, Family::ER, Family::BA};
  std::size_t n_min{100};
  std::size_t n_max{1000};
  double k_min{3.0};
  double k_max{10.0};
  double rho_min{-0.5};
  double rho_max{0.5};
  double rho_abs_min{0.0};      // targets with |rho*| below this are redrawn
  double epsilon{0.005};
  double target_margin{0.1};    // fraction of the feasible half-width

  void validate() const;
};

struct EpisodeSpec {
  Graph graph;
  double rho_target{0.0};
};

/// Draws a graph and a target clipped into the graph's feasible range.
EpisodeSpec sample_episode(const DomainSampler& domain, Seed seed);

struct TrainConfig {
  RewardConfig reward{};
  PPOConfig ppo{};
  Architecture arch{};
  MaskConfig mask{};
  DomainSampler domain{};
  std::size_t rollout_steps{4096};
  std::size_t total_steps{2000000};
  std::size_t step_cap_per_edge{10};        // episode cap = 10 E
  std::size_t num_envs{8};                  // persistent environments; each fills rollout_steps / num_envs
  std::size_t threads{1};
  std::size_t eval_interval{5};             // updates between probe evaluations
  std::size_t probe_episodes{32};
  double stop_success_rate{2.0};            // early stop when probe success reaches this (> 1 disables)
  std::size_t divergence_steps{1000000};    // abort if probe success is still 0 after this many steps
  Seed seed{};
  std::string out_dir;                      // empty: no files written

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);

struct CurveRow {
  std::size_t env_steps{0};
  double mean_reward{0.0};
  double success_rate{0.0};
  double mean_t{0.0};
  double kl{0.0};
  double clip_frac{0.0};
};

struct ProbeStats {
  double success_rate{0.0};
  double mean_t{0.0};  // over all probe episodes, failures counted at their step count
};

/// Fixed probe set drawn from the domain with seeds derived from `seed`.
std::vector<EpisodeSpec> make_probe_set(const DomainSampler& domain, std::size_t count, Seed seed);

/// Runs every probe episode with `actor` (episode seeds derived from seed).
ProbeStats evaluate_probes(const std::vector<EpisodeSpec>& probes, const Actor& actor, double epsilon,
                           std::size_t step_cap_per_edge, Seed seed, std::size_t threads);

struct TrainResult {
  PolicyParams params;
  std::vector<CurveRow> curve;
  std::size_t env_steps{0};
  ProbeStats last_probe;
};

/// Synchronous PPO. Writes <out_dir>/checkpoint and
/// <out_dir>/training_curve.csv when out_dir is set. `progress` (optional)
/// is called after every curve row.
TrainResult train(const TrainConfig& cfg, const std::function<void(const CurveRow&)>& progress = {});

void write_curve_csv(const std::string& path, const std::vector<CurveRow>& curve);

}  // namespace assortgen
