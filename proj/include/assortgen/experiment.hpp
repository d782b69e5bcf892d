#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "assortgen/ergm.hpp"
#include "assortgen/generators.hpp"
#include "assortgen/metrics.hpp"
#include "assortgen/policy.hpp"
#include "assortgen/train.hpp"

namespace assortgen {

inline constexpr const char* kLibraryVersion = "assortgen 1.0.0";

struct ErgmSettings {
  TuneConfig tune{};
  std::size_t chain_steps_per_edge{400};  // length of transient-detection chains
  std::size_t transient_chains{16};       // chains averaged for the transient estimate
  std::size_t burn_in_per_edge{0};        // 0: twice the measured transient, at least 20 E
  std::optional<double> fixed_lambda;     // skip tuning
};

/// Transient of `settings.transient_chains` MH runs from `start`: their
/// averaged trace judged against the pooled single-chain steady-state spread.
/// Empty if the averaged trace does not settle before the final quarter.
std::optional<std::size_t> ergm_transient(const Graph& start, double lambda, const ErgmSettings& settings, Seed seed,
                                          std::size_t threads);

struct ErgmEnsemble {
  TuneResult tune;
  std::size_t burn_in{0};
  std::vector<Graph> samples;
};

/// Canonical ensemble: lambda tuned on `base`, then `count` independent
/// chains, each from its own configuration-model randomization of base.
ErgmEnsemble ergm_ensemble(const Graph& base, double target, std::size_t count, const ErgmSettings& settings,
                           Seed seed, std::size_t threads);

/// Hard-constraint ensemble: `count` episodes, each from its own
/// randomization of base.
std::vector<EpisodeResult> dmgg_ensemble(const Graph& base, double target, double epsilon, std::size_t count,
                                         const Actor& actor, std::size_t step_cap, Seed seed, std::size_t threads);

/// Seed-matched cost comparison on one generated graph.
struct CostSample {
  std::size_t n{0};
  double target{0.0};
  std::size_t seed_index{0};
  double lambda{0.0};
  std::size_t ergm_t{0};
  bool ergm_converged{false};
  std::size_t dmgg_t{0};
  bool dmgg_success{false};
};

CostSample cost_sample(const ModelSpec& spec, double target, double epsilon, const Actor& actor,
                       std::size_t step_cap_per_edge, const ErgmSettings& settings, Seed seed);

struct FluxSettings {
  double target{0.8};
  double epsilon{0.005};
  std::size_t runs{50};
  std::size_t window{0};  // 0: max(1, E / 20)
  std::vector<double> levels{0.2, 0.4, 0.6};
  std::size_t max_steps_per_edge{200};
};

struct FluxLevel {
  double level{0.0};
  std::optional<std::size_t> t_dmgg, t_ergm;  // empty if the mean trace never reaches the level
  FluxMatrix dmgg, ergm;
};

struct FluxComparison {
  double lambda{0.0};
  std::size_t window{0};
  std::vector<double> mean_trace_dmgg, mean_trace_ergm;
  std::vector<FluxLevel> levels;
};

/// Windowed joint-degree flux of both methods at the first steps where the
/// run-averaged assortativity reaches each level.
FluxComparison flux_comparison(const Graph& base, const FluxSettings& settings, const Actor& actor,
                               const ErgmSettings& ergm, Seed seed, std::size_t threads);

struct ExperimentConfig {
  std::string kind;
  ModelSpec model = [] {
    ModelSpec m;
    m.n = 1000;
    return m;
  }();
  std::optional<std::string> input;  // edge-list path used instead of model
  std::vector<std::size_t> sizes{100, 400, 1600};
  std::vector<double> targets;       // empty: kind default
  std::optional<double> lambda;      // ergm kind: fixed lambda instead of tuning
  double epsilon{0.005};
  std::size_t samples{100};
  std::size_t seeds{5};
  std::vector<Family> families{Family::WS, Family::ER, Family::BA, Family::SBM,
                               Family::RGG, Family::CL, Family::HK};
  ActorKind actor{ActorKind::Greedy};
  std::string checkpoint;
  std::size_t pool_size{64};
  std::size_t step_cap_per_edge{1000};
  ErgmSettings ergm{};
  FluxSettings flux{};
  TrainConfig train{};
  Seed seed{};
  std::size_t threads{1};
  std::string out_dir{"out"};

  void validate() const;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"generate",       "ergm",          "dmgg",
                                              "train",          "sigma-vs-N",    "entropy-vs-rho",
                                              "cost-scaling",   "topology-sweep", "clustering-compare",
                                              "flux-snapshots"};
  return kinds;
}

/// Overlays the JSON config (schema_version already checked) onto cfg.
/// Throws Config on unknown keys or bad values.
void apply_experiment_json(const nlohmann::json& j, ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

/// Runs the pipeline of cfg.kind and writes CSV outputs plus manifest.json
/// into cfg.out_dir. Returns the manifest. Throws MissingCheckpoint,
/// Infeasible, Io, Config as appropriate.
nlohmann::json run_experiment(const ExperimentConfig& cfg);

}  // namespace assortgen
