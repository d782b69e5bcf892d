#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "assortgen/config.hpp"
#include "assortgen/ergm.hpp"
#include "assortgen/experiment.hpp"
#include "assortgen/metrics.hpp"

using namespace assortgen;
using nlohmann::json;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Infeasible: return 3;
    case ErrorKind::NotConverged: return 4;
    default: return 1;
  }
}

struct ModelFlags {
  std::string family;
  std::size_t n{0};
  double k{0.0};
  std::string input;
  CLI::Option* family_opt{nullptr};
  CLI::Option* n_opt{nullptr};
  CLI::Option* k_opt{nullptr};
  CLI::Option* input_opt{nullptr};

  void add(CLI::App* app, bool with_input = true) {
    family_opt = app->add_option("--family", family, "WS, ER, BA, SBM, RGG, CL or HK");
    n_opt = app->add_option("--n", n, "number of nodes");
    k_opt = app->add_option("--k", k, "mean degree");
    if (with_input) input_opt = app->add_option("--input", input, "edge list used instead of a generated graph");
  }

  void apply(ExperimentConfig& cfg) const {
    if (family_opt && family_opt->count()) {
      try {
        cfg.model.family = family_from_string(family);
      } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
      }
    }
    if (n_opt && n_opt->count()) cfg.model.n = n;
    if (k_opt && k_opt->count()) cfg.model.mean_degree = k;
    if (input_opt && input_opt->count()) cfg.input = input;
  }
};

Graph base_graph(const ExperimentConfig& cfg) {
  if (cfg.input) return read_edge_list_file(*cfg.input);
  return generate(cfg.model, derive_seed(cfg.seed, 0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assortativity-targeted graph generation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out = "out";
  std::string config_path;
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* threads_opt = app.add_option("--threads", threads, "worker threads");
  auto* out_opt = app.add_option("--out", out, "output directory");
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);

  // shared run flags
  std::vector<double> targets;
  double epsilon = 0.005;
  std::size_t samples = 1;
  double lambda = 0.0;
  std::string actor = "greedy";
  std::string checkpoint;

  auto* gen = app.add_subcommand("generate", "generate an initial graph");
  ModelFlags gen_model;
  gen_model.add(gen, false);

  auto* ergm = app.add_subcommand("ergm", "canonical ensemble");
  ergm->require_subcommand(1);
  auto* ergm_run = ergm->add_subcommand("run", "sample equilibrated chains");
  ModelFlags ergm_model;
  ergm_model.add(ergm_run);
  auto* ergm_targets = ergm_run->add_option("--target", targets, "target assortativity (repeatable)");
  auto* ergm_samples = ergm_run->add_option("--samples", samples, "chains per target");
  auto* ergm_lambda = ergm_run->add_option("--lambda", lambda, "fixed lambda, skips tuning");
  auto* ergm_tune = ergm->add_subcommand("tune", "tune lambda for one target");
  ModelFlags tune_model;
  tune_model.add(ergm_tune);
  double tune_target = 0.0;
  ergm_tune->add_option("--target", tune_target, "target assortativity")->required();

  auto* dmgg = app.add_subcommand("dmgg", "hard-constraint generation");
  dmgg->require_subcommand(1);
  auto* dmgg_run = dmgg->add_subcommand("run", "run episodes");
  ModelFlags dmgg_model;
  dmgg_model.add(dmgg_run);
  auto* dmgg_targets = dmgg_run->add_option("--target", targets, "target assortativity (repeatable)");
  auto* dmgg_eps = dmgg_run->add_option("--epsilon", epsilon, "tolerance");
  auto* dmgg_samples = dmgg_run->add_option("--samples", samples, "episodes per target");
  auto* dmgg_actor =
      dmgg_run->add_option("--actor", actor, "greedy, policy or random")->check(CLI::IsMember({"greedy", "policy", "random"}));
  auto* dmgg_ckpt = dmgg_run->add_option("--checkpoint", checkpoint, "checkpoint directory for --actor policy");

  auto* tr = app.add_subcommand("train", "train the policy");
  std::size_t total_steps = 0;
  auto* tr_steps = tr->add_option("--total-steps", total_steps, "environment steps");

  auto* met = app.add_subcommand("metrics", "metrics of an edge list");
  std::string met_input;
  met->add_option("input", met_input, "edge list")->required()->check(CLI::ExistingFile);
  bool met_jdm = false;
  met->add_flag("--jdm", met_jdm, "write the joint degree matrix to <out>/jdm.csv");

  auto* exp = app.add_subcommand("experiment", "run an experiment pipeline");
  std::string kind;
  exp->add_option("kind", kind, "experiment kind")->required()->check(CLI::IsMember(experiment_kinds()));
  ModelFlags exp_model;
  exp_model.add(exp);
  auto* exp_actor =
      exp->add_option("--actor", actor, "greedy, policy or random")->check(CLI::IsMember({"greedy", "policy", "random"}));
  auto* exp_ckpt = exp->add_option("--checkpoint", checkpoint, "checkpoint directory for --actor policy");
  auto* exp_samples = exp->add_option("--samples", samples, "samples per configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) apply_experiment_json(load_config_file(config_path), cfg);
    if (seed_opt->count()) cfg.seed = Seed{seed};
    if (threads_opt->count()) cfg.threads = threads;
    if (out_opt->count()) cfg.out_dir = out;
    auto set_actor = [&](CLI::Option* a, CLI::Option* c) {
      if (a->count()) {
        cfg.actor = actor == "policy" ? ActorKind::Policy : (actor == "random" ? ActorKind::Random : ActorKind::Greedy);
      }
      if (c->count()) cfg.checkpoint = checkpoint;
    };

    if (*gen) {
      cfg.kind = "generate";
      gen_model.apply(cfg);
    } else if (*ergm_run) {
      cfg.kind = "ergm";
      ergm_model.apply(cfg);
      if (ergm_targets->count()) cfg.targets = targets;
      if (ergm_samples->count()) cfg.samples = samples;
      if (ergm_lambda->count()) cfg.lambda = lambda;
    } else if (*ergm_tune) {
      tune_model.apply(cfg);
      const Graph g = base_graph(cfg);
      const TuneResult t = tune_lambda(g, tune_target, derive_seed(cfg.seed, 1), cfg.ergm.tune);
      json log = json::array();
      for (const auto& e : t.log) log.push_back({{"iteration", e.iteration}, {"lambda", e.lambda}, {"rho_hat", e.rho_hat}});
      const json res = {{"rho_target", tune_target}, {"lambda", t.lambda}, {"rho_hat", t.rho_hat}, {"slope", t.slope},
                        {"seed", cfg.seed.value},    {"log", log}};
      std::filesystem::create_directories(cfg.out_dir);
      std::ofstream(std::filesystem::path(cfg.out_dir) / "tune.json") << res.dump(2) << '\n';
      std::printf("lambda %.10g rho_hat %.10g\n", t.lambda, t.rho_hat);
      return 0;
    } else if (*dmgg_run) {
      cfg.kind = "dmgg";
      dmgg_model.apply(cfg);
      if (dmgg_targets->count()) cfg.targets = targets;
      if (dmgg_eps->count()) cfg.epsilon = epsilon;
      if (dmgg_samples->count()) cfg.samples = samples;
      set_actor(dmgg_actor, dmgg_ckpt);
    } else if (*tr) {
      cfg.kind = "train";
      if (tr_steps->count()) cfg.train.total_steps = total_steps;
    } else if (*met) {
      const Graph g = read_edge_list_file(met_input);
      json res = {{"num_nodes", g.num_nodes()}, {"num_edges", g.num_edges()}, {"clustering", clustering(g)}};
      if (!DegreeSequenceContext::of(g).degenerate()) res["assortativity"] = assortativity(g);
      if (met_jdm) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream f(std::filesystem::path(cfg.out_dir) / "jdm.csv");
        write_jdm_csv(f, joint_degree_matrix(g));
      }
      std::cout << res.dump(2) << '\n';
      return 0;
    } else if (*exp) {
      cfg.kind = kind;
      exp_model.apply(cfg);
      if (exp_samples->count()) cfg.samples = samples;
      set_actor(exp_actor, exp_ckpt);
    }

    const json manifest = run_experiment(cfg);
    std::printf("%s: wrote %zu outputs to %s\n", cfg.kind.c_str(), manifest["outputs"].size(), cfg.out_dir.c_str());
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
