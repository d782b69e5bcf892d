#include "assortgen/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "assortgen/analysis.hpp"
#include "assortgen/checkpoint.hpp"
#include "assortgen/config.hpp"
#include "assortgen/parallel.hpp"

namespace assortgen {

namespace fs = std::filesystem;

std::optional<std::size_t> ergm_transient(const Graph& start, double lambda, const ErgmSettings& settings, Seed seed,
                                          std::size_t threads) {
  const std::size_t len = std::max<std::size_t>(4, settings.chain_steps_per_edge * start.num_edges());
  const std::size_t chains = std::max<std::size_t>(1, settings.transient_chains);
  const std::size_t tail_start = len - len / 4;
  std::vector<double> sum(len, 0.0);
  double tail_sum = 0.0, tail_sq = 0.0;
  // batches of `threads` chains, folded in index order
  const std::size_t batch = std::max<std::size_t>(1, std::min(threads, chains));
  std::vector<std::vector<double>> traces(batch);
  for (std::size_t first = 0; first < chains; first += batch) {
    const std::size_t n = std::min(batch, chains - first);
    parallel_for(n, threads, [&](std::size_t j) {
      ChainState st(start);
      Rng rng = make_rng(derive_seed(seed, first + j));
      traces[j].resize(len);
      for (std::size_t s = 0; s < len; ++s) traces[j][s] = mh_step(st, lambda, rng).rho;
    });
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t s = 0; s < len; ++s) sum[s] += traces[j][s];
      for (std::size_t s = tail_start; s < len; ++s) {
        tail_sum += traces[j][s];
        tail_sq += traces[j][s] * traces[j][s];
      }
    }
  }
  for (double& v : sum) v /= static_cast<double>(chains);
  const double count = static_cast<double>(chains * (len - tail_start));
  const double m = tail_sum / count;
  const double sd = std::sqrt(std::max(0.0, tail_sq / count - m * m));
  try {
    return transient_time(sum, sd);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotConverged) throw;
    return std::nullopt;
  }
}

ErgmEnsemble ergm_ensemble(const Graph& base, double target, std::size_t count, const ErgmSettings& settings,
                           Seed seed, std::size_t threads) {
  ErgmEnsemble out;
  if (settings.fixed_lambda) {
    out.tune.lambda = *settings.fixed_lambda;
  } else {
    out.tune = tune_lambda(base, target, derive_seed(seed, 0), settings.tune);
  }
  const std::size_t e = base.num_edges();
  if (settings.burn_in_per_edge > 0) {
    out.burn_in = settings.burn_in_per_edge * e;
  } else {
    const Graph start = randomize_configuration(base, derive_seed(seed, 1), default_swap_budget(base));
    const auto t = ergm_transient(start, out.tune.lambda, settings, derive_seed(seed, 2), threads);
    out.burn_in = std::max(2 * t.value_or(settings.chain_steps_per_edge * e), 20 * e);
  }
  out.samples.resize(count);
  const Seed start_seed = derive_seed(seed, 3);
  const Seed chain_seed = derive_seed(seed, 4);
  parallel_for(count, threads, [&](std::size_t i) {
    ChainState st(randomize_configuration(base, derive_seed(start_seed, i), default_swap_budget(base)));
    Rng rng = make_rng(derive_seed(chain_seed, i));
    for (std::size_t s = 0; s < out.burn_in; ++s) mh_step(st, out.tune.lambda, rng);
    out.samples[i] = std::move(st.graph);
  });
  return out;
}

std::vector<EpisodeResult> dmgg_ensemble(const Graph& base, double target, double epsilon, std::size_t count,
                                         const Actor& actor, std::size_t step_cap, Seed seed, std::size_t threads) {
  std::vector<EpisodeResult> out(count);
  const Seed start_seed = derive_seed(seed, 1);
  const Seed run_seed = derive_seed(seed, 2);
  EpisodeConfig ec;
  ec.rho_target = target;
  ec.epsilon = epsilon;
  ec.step_cap = step_cap;
  parallel_for(count, threads, [&](std::size_t i) {
    const Graph start = randomize_configuration(base, derive_seed(start_seed, i), default_swap_budget(base));
    out[i] = run_episode(start, ec, actor, derive_seed(run_seed, i));
  });
  return out;
}

CostSample cost_sample(const ModelSpec& spec, double target, double epsilon, const Actor& actor,
                       std::size_t step_cap_per_edge, const ErgmSettings& settings, Seed seed) {
  CostSample cs;
  cs.n = spec.n;
  cs.target = target;
  const Graph base = generate(spec, derive_seed(seed, 0));
  const Graph start = randomize_configuration(base, derive_seed(seed, 1), default_swap_budget(base));
  cs.lambda = settings.fixed_lambda ? *settings.fixed_lambda
                                    : tune_lambda(base, target, derive_seed(seed, 2), settings.tune).lambda;
  const auto t = ergm_transient(start, cs.lambda, settings, derive_seed(seed, 3), 1);
  cs.ergm_converged = t.has_value();
  cs.ergm_t = t.value_or(settings.chain_steps_per_edge * base.num_edges());

  EpisodeConfig ec;
  ec.rho_target = target;
  ec.epsilon = epsilon;
  ec.step_cap = step_cap_per_edge * base.num_edges();
  const EpisodeResult r = run_episode(start, ec, actor, derive_seed(seed, 4));
  cs.dmgg_t = r.steps;
  cs.dmgg_success = r.success;
  return cs;
}

namespace {

std::optional<std::size_t> first_crossing(const std::vector<double>& trace, double level) {
  if (trace.empty()) return std::nullopt;
  const double dir = level >= trace.front() ? 1.0 : -1.0;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    if ((trace[t] - level) * dir >= 0.0) return t;
  }
  return std::nullopt;
}

std::vector<double> mean_trace(const std::vector<std::vector<double>>& traces) {
  std::size_t len = 0;
  for (const auto& t : traces) len = std::max(len, t.size());
  std::vector<double> mean(len, 0.0);
  for (const auto& t : traces) {
    for (std::size_t i = 0; i < len; ++i) mean[i] += t.empty() ? 0.0 : t[std::min(i, t.size() - 1)];
  }
  for (double& v : mean) v /= static_cast<double>(traces.size());
  return mean;
}

// Steps the DMGG actor (kind 0) or the MH chain (kind 1) from `start` and
// calls visit(step, graph, rho) after every step, including step 0.
template <typename Visit>
void replay(int kind, const Graph& start, double target, double eps, double lambda, const Actor& actor,
            std::size_t max_steps, Seed seed, Visit&& visit) {
  if (kind == 1) {
    ChainState st(start);
    Rng rng = make_rng(seed);
    visit(0, st.graph, st.rho());
    for (std::size_t s = 1; s <= max_steps; ++s) {
      const double rho = mh_step(st, lambda, rng).rho;
      visit(s, st.graph, rho);
    }
    return;
  }
  Graph g = start;
  const DegreeSequenceContext ctx = DegreeSequenceContext::of(g);
  const double eps_p = epsilon_phys(eps, g.num_edges(), ctx.var_k);
  Rng rng = make_rng(seed);
  std::int64_t k = k_sum(g);
  double rho = assortativity_from_k(k, ctx.num_edges, ctx.mu, ctx.denom);
  visit(0, g, rho);
  for (std::size_t s = 1; s <= max_steps && std::abs(rho - target) > eps_p; ++s) {
    const RewiringAction a = actor_step(actor, g, rho, target, rng);
    k += delta_k_unchecked(g, a);
    apply_unchecked(g, a);
    rho = assortativity_from_k(k, ctx.num_edges, ctx.mu, ctx.denom);
    visit(s, g, rho);
  }
}

}  // namespace

FluxComparison flux_comparison(const Graph& base, const FluxSettings& settings, const Actor& actor,
                               const ErgmSettings& ergm, Seed seed, std::size_t threads) {
  FluxComparison out;
  const std::size_t e = base.num_edges();
  out.window = settings.window > 0 ? settings.window : std::max<std::size_t>(1, e / 20);
  out.lambda = ergm.fixed_lambda ? *ergm.fixed_lambda
                                 : tune_lambda(base, settings.target, derive_seed(seed, 0), ergm.tune).lambda;
  const std::size_t max_steps = settings.max_steps_per_edge * e;
  const std::size_t runs = settings.runs;
  std::vector<Graph> starts(runs);
  parallel_for(runs, threads, [&](std::size_t i) {
    starts[i] = randomize_configuration(base, derive_seed(derive_seed(seed, 1), i), default_swap_budget(base));
  });
  auto run_seed = [&](int kind, std::size_t i) { return derive_seed(derive_seed(seed, 2 + kind), i); };

  for (int kind : {0, 1}) {
    std::vector<std::vector<double>> traces(runs);
    parallel_for(runs, threads, [&](std::size_t i) {
      replay(kind, starts[i], settings.target, settings.epsilon, out.lambda, actor, max_steps, run_seed(kind, i),
             [&](std::size_t, const Graph&, double rho) { traces[i].push_back(rho); });
    });
    (kind == 0 ? out.mean_trace_dmgg : out.mean_trace_ergm) = mean_trace(traces);
  }

  out.levels.resize(settings.levels.size());
  std::vector<std::size_t> wanted[2];
  for (std::size_t l = 0; l < settings.levels.size(); ++l) {
    FluxLevel& fl = out.levels[l];
    fl.level = settings.levels[l];
    fl.t_dmgg = first_crossing(out.mean_trace_dmgg, fl.level);
    fl.t_ergm = first_crossing(out.mean_trace_ergm, fl.level);
    if (fl.t_dmgg) wanted[0].insert(wanted[0].end(), {*fl.t_dmgg, *fl.t_dmgg + out.window});
    if (fl.t_ergm) wanted[1].insert(wanted[1].end(), {*fl.t_ergm, *fl.t_ergm + out.window});
  }

  for (int kind : {0, 1}) {
    auto& want = wanted[kind];
    std::sort(want.begin(), want.end());
    want.erase(std::unique(want.begin(), want.end()), want.end());
    if (want.empty()) continue;
    // J at each wanted step, per run; finished DMGG runs keep their final J.
    std::vector<std::map<std::size_t, JointDegreeMatrix>> snaps(runs);
    parallel_for(runs, threads, [&](std::size_t i) {
      JointDegreeMatrix last;
      replay(kind, starts[i], settings.target, settings.epsilon, out.lambda, actor, std::min(max_steps, want.back()),
             run_seed(kind, i), [&](std::size_t s, const Graph& g, double) {
               if (std::binary_search(want.begin(), want.end(), s)) snaps[i][s] = joint_degree_matrix(g);
               if (kind == 0) last = joint_degree_matrix(g);
             });
      for (std::size_t s : want) {
        if (!snaps[i].contains(s)) snaps[i][s] = kind == 0 ? last : JointDegreeMatrix{};
      }
    });
    for (FluxLevel& fl : out.levels) {
      const auto& t = kind == 0 ? fl.t_dmgg : fl.t_ergm;
      if (!t) continue;
      if (kind == 1 && *t + out.window > max_steps) continue;
      std::vector<JdmTrajectory> pairs(runs);
      for (std::size_t i = 0; i < runs; ++i) pairs[i] = {snaps[i][*t], snaps[i][*t + out.window]};
      FluxMatrix f = flux(pairs, 0);
      for (auto& [key, v] : f.values) v /= static_cast<double>(out.window);
      f.t = *t;
      (kind == 0 ? fl.dmgg : fl.ergm) = std::move(f);
    }
  }
  return out;
}

void ExperimentConfig::validate() const {
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    throw Error(ErrorKind::Config, "unknown experiment kind '" + kind + "'");
  }
  if (samples < 1 || seeds < 1 || sizes.empty() || pool_size < 1 || step_cap_per_edge < 1 || !(epsilon > 0.0) ||
      flux.runs < 1 || families.empty()) {
    throw Error(ErrorKind::Config, "experiment counts must be >= 1 and epsilon > 0");
  }
  for (double t : targets) {
    if (!(t >= -1.0 && t <= 1.0)) throw Error(ErrorKind::Config, "target outside [-1, 1]");
  }
  if (!(flux.target >= -1.0 && flux.target <= 1.0)) throw Error(ErrorKind::Config, "flux target outside [-1, 1]");
}

void apply_experiment_json(const nlohmann::json& j, ExperimentConfig& c) {
  StrictObject o(j, "config");
  o.get<int>("schema_version", kConfigSchemaVersion);
  c.kind = o.get("kind", c.kind);
  if (o.has("model")) c.model = parse_model_spec(o.raw("model"), c.model);
  if (o.has("input")) c.input = o.require<std::string>("input");
  c.sizes = o.get("sizes", c.sizes);
  c.targets = o.get("targets", c.targets);
  if (o.has("lambda")) c.lambda = o.require<double>("lambda");
  c.epsilon = o.get("epsilon", c.epsilon);
  c.samples = o.get("samples", c.samples);
  c.seeds = o.get("seeds", c.seeds);
  if (o.has("families")) {
    c.families.clear();
    for (const auto& f : o.require<std::vector<std::string>>("families")) {
      try {
        c.families.push_back(family_from_string(f));
      } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.what());
      }
    }
  }
  if (o.has("actor")) {
    const auto a = o.require<std::string>("actor");
    if (a == "greedy") c.actor = ActorKind::Greedy;
    else if (a == "policy") c.actor = ActorKind::Policy;
    else if (a == "random") c.actor = ActorKind::Random;
    else throw Error(ErrorKind::Config, "unknown actor '" + a + "'");
  }
  c.checkpoint = o.get("checkpoint", c.checkpoint);
  c.pool_size = o.get("pool_size", c.pool_size);
  c.step_cap_per_edge = o.get("step_cap_per_edge", c.step_cap_per_edge);
  if (o.has("ergm")) {
    StrictObject e = o.child("ergm");
    c.ergm.tune.tolerance = e.get("tolerance", c.ergm.tune.tolerance);
    c.ergm.tune.pilot_steps_per_edge = e.get("pilot_steps_per_edge", c.ergm.tune.pilot_steps_per_edge);
    c.ergm.tune.verify_steps_per_edge = e.get("verify_steps_per_edge", c.ergm.tune.verify_steps_per_edge);
    c.ergm.tune.max_iterations = e.get("max_iterations", c.ergm.tune.max_iterations);
    c.ergm.tune.gain = e.get("gain", c.ergm.tune.gain);
    c.ergm.tune.feasible_margin = e.get("feasible_margin", c.ergm.tune.feasible_margin);
    c.ergm.chain_steps_per_edge = e.get("chain_steps_per_edge", c.ergm.chain_steps_per_edge);
    c.ergm.transient_chains = e.get("transient_chains", c.ergm.transient_chains);
    c.ergm.burn_in_per_edge = e.get("burn_in_per_edge", c.ergm.burn_in_per_edge);
    e.finish();
  }
  if (o.has("flux")) {
    StrictObject f = o.child("flux");
    c.flux.target = f.get("target", c.flux.target);
    c.flux.epsilon = f.get("epsilon", c.flux.epsilon);
    c.flux.runs = f.get("runs", c.flux.runs);
    c.flux.window = f.get("window", c.flux.window);
    c.flux.levels = f.get("levels", c.flux.levels);
    c.flux.max_steps_per_edge = f.get("max_steps_per_edge", c.flux.max_steps_per_edge);
    f.finish();
  }
  if (o.has("train")) parse_train_config(o.raw("train"), c.train);
  c.seed.value = o.get("seed", c.seed.value);
  c.threads = o.get("threads", c.threads);
  c.out_dir = o.get("out", c.out_dir);
  o.finish();
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json fams = nlohmann::json::array();
  for (Family f : c.families) fams.push_back(std::string(to_string(f)));
  const char* actor = c.actor == ActorKind::Greedy ? "greedy" : (c.actor == ActorKind::Policy ? "policy" : "random");
  nlohmann::json j = {{"schema_version", kConfigSchemaVersion},
                      {"kind", c.kind},
                      {"model", to_json(c.model)},
                      {"sizes", c.sizes},
                      {"targets", c.targets},
                      {"epsilon", c.epsilon},
                      {"samples", c.samples},
                      {"seeds", c.seeds},
                      {"families", fams},
                      {"actor", actor},
                      {"checkpoint", c.checkpoint},
                      {"pool_size", c.pool_size},
                      {"step_cap_per_edge", c.step_cap_per_edge},
                      {"ergm",
                       {{"tolerance", c.ergm.tune.tolerance},
                        {"pilot_steps_per_edge", c.ergm.tune.pilot_steps_per_edge},
                        {"verify_steps_per_edge", c.ergm.tune.verify_steps_per_edge},
                        {"max_iterations", c.ergm.tune.max_iterations},
                        {"gain", c.ergm.tune.gain},
                        {"feasible_margin", c.ergm.tune.feasible_margin},
                        {"chain_steps_per_edge", c.ergm.chain_steps_per_edge},
                        {"transient_chains", c.ergm.transient_chains},
                        {"burn_in_per_edge", c.ergm.burn_in_per_edge}}},
                      {"flux",
                       {{"target", c.flux.target},
                        {"epsilon", c.flux.epsilon},
                        {"runs", c.flux.runs},
                        {"window", c.flux.window},
                        {"levels", c.flux.levels},
                        {"max_steps_per_edge", c.flux.max_steps_per_edge}}},
                      {"seed", c.seed.value},
                      {"out", c.out_dir}};
  if (c.input) j["input"] = *c.input;
  if (c.lambda) j["lambda"] = *c.lambda;
  if (c.kind == "train") j["train"] = to_json(c.train);
  return j;
}

namespace {

std::string cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }
std::string cell(const char* v) { return v; }
std::string cell(std::string_view v) { return std::string(v); }

class Csv {
public:
  Csv(const fs::path& path, const std::vector<std::string>& header, std::vector<std::string>& outputs)
      : out_(path, std::ios::trunc) {
    if (!out_) throw Error(ErrorKind::Io, "cannot write " + path.string());
    outputs.push_back(path.filename().string());
    line(header);
  }
  template <typename... Ts>
  void row(const Ts&... vals) {
    line({cell(vals)...});
  }

private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  std::ofstream out_;
};

struct Summary {
  double mean{0.0};
  double sd{0.0};
};

Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.sd += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(s.sd / static_cast<double>(v.size()));
  return s;
}

EnsembleRecord record_of(const std::vector<Graph>& graphs) {
  EnsembleRecord rec;
  for (const Graph& g : graphs) rec.add_sample(g, assortativity(g), clustering(g));
  return rec;
}

std::vector<Graph> successful(const std::vector<EpisodeResult>& runs) {
  std::vector<Graph> out;
  for (const auto& r : runs) {
    if (r.success) out.push_back(r.final_graph);
  }
  return out;
}

double success_rate(const std::vector<EpisodeResult>& runs) {
  double s = 0.0;
  for (const auto& r : runs) s += r.success ? 1.0 : 0.0;
  return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
}

double mean_steps(const std::vector<EpisodeResult>& runs) {
  double s = 0.0;
  for (const auto& r : runs) s += static_cast<double>(r.steps);
  return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
}

std::vector<double> default_targets(const std::string& kind) {
  if (kind == "sigma-vs-N") return {-0.4, 0.4};
  if (kind == "entropy-vs-rho") return {-0.4, 0.0, 0.4};
  if (kind == "cost-scaling") return {-0.4, -0.2, 0.2, 0.4};
  if (kind == "topology-sweep") return {-0.3, 0.0, 0.3};
  if (kind == "clustering-compare") return {0.0, 0.6};
  return {0.4};
}

std::string level_tag(double level) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.3f", level);
  return buf;
}

}  // namespace

nlohmann::json run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  if (cfg.targets.empty()) cfg.targets = default_targets(cfg.kind);
  cfg.validate();
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create output directory " + cfg.out_dir);

  PolicyParams policy;
  Actor actor;
  actor.kind = cfg.actor;
  actor.pool_size = cfg.pool_size;
  const bool needs_actor = cfg.kind != "generate" && cfg.kind != "ergm" && cfg.kind != "train";
  if (needs_actor && cfg.actor == ActorKind::Policy) {
    if (cfg.checkpoint.empty()) throw Error(ErrorKind::MissingCheckpoint, "policy actor requires a checkpoint");
    policy = load_checkpoint(cfg.checkpoint).params;
    actor.params = &policy;
  }
  auto base_graph = [&](const ModelSpec& spec, std::uint64_t tag) {
    if (cfg.input) return read_edge_list_file(*cfg.input);
    return generate(spec, derive_seed(cfg.seed, tag));
  };

  std::vector<std::string> outputs;
  nlohmann::json results = nlohmann::json::object();
  const std::string& kind = cfg.kind;

  if (kind == "generate") {
    const Graph g = base_graph(cfg.model, 0);
    write_edge_list_file((dir / "graph.txt").string(), g);
    outputs.push_back("graph.txt");
    results = {{"num_nodes", g.num_nodes()}, {"num_edges", g.num_edges()}, {"clustering", clustering(g)}};
    if (!DegreeSequenceContext::of(g).degenerate()) results["assortativity"] = assortativity(g);
  } else if (kind == "ergm") {
    const Graph base = base_graph(cfg.model, 0);
    ErgmSettings es = cfg.ergm;
    if (cfg.lambda) es.fixed_lambda = cfg.lambda;
    Csv samples(dir / "samples.csv", {"rho_target", "sample", "rho", "clustering"}, outputs);
    Csv summary(dir / "summary.csv",
                {"rho_target", "lambda", "burn_in", "samples", "mean_rho", "sigma_rho", "mean_c", "s_di"}, outputs);
    Csv log(dir / "tune_log.csv", {"rho_target", "iteration", "lambda", "rho_hat"}, outputs);
    for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
      const double target = cfg.targets[ti];
      const ErgmEnsemble ens = ergm_ensemble(base, target, cfg.samples, es, derive_seed(cfg.seed, 100 + ti), cfg.threads);
      const EnsembleRecord rec = record_of(ens.samples);
      for (std::size_t i = 0; i < rec.num_samples; ++i) {
        samples.row(target, i, rec.rho_samples[i], rec.clustering_samples[i]);
      }
      const Summary rho = summarize(rec.rho_samples);
      summary.row(target, ens.tune.lambda, ens.burn_in, rec.num_samples, rho.mean, rho.sd,
                  summarize(rec.clustering_samples).mean, dyad_entropy(rec));
      for (const auto& le : ens.tune.log) log.row(target, le.iteration, le.lambda, le.rho_hat);
    }
  } else if (kind == "dmgg") {
    const Graph base = base_graph(cfg.model, 0);
    Csv runs(dir / "runs.csv", {"rho_target", "run", "success", "T", "rho_final", "clustering"}, outputs);
    Csv summary(dir / "summary.csv",
                {"rho_target", "runs", "success_rate", "mean_T", "mean_rho", "sigma_rho", "mean_c", "s_di"}, outputs);
    for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
      const double target = cfg.targets[ti];
      const auto res = dmgg_ensemble(base, target, cfg.epsilon, cfg.samples, actor,
                                     cfg.step_cap_per_edge * base.num_edges(), derive_seed(cfg.seed, 100 + ti),
                                     cfg.threads);
      for (std::size_t i = 0; i < res.size(); ++i) {
        runs.row(target, i, res[i].success, res[i].steps, assortativity(res[i].final_graph),
                 clustering(res[i].final_graph));
      }
      const EnsembleRecord rec = record_of(successful(res));
      const Summary rho = summarize(rec.rho_samples);
      summary.row(target, res.size(), success_rate(res), mean_steps(res), rho.mean, rho.sd,
                  summarize(rec.clustering_samples).mean, rec.num_samples > 0 ? dyad_entropy(rec) : 0.0);
    }
  } else if (kind == "train") {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    tc.threads = cfg.threads;
    tc.out_dir = cfg.out_dir;
    const TrainResult tr = train(tc);
    outputs.push_back("training_curve.csv");
    outputs.push_back("checkpoint");
    results = {{"env_steps", tr.env_steps},
               {"probe_success_rate", tr.last_probe.success_rate},
               {"probe_mean_T", tr.last_probe.mean_t}};
  } else if (kind == "sigma-vs-N") {
    Csv out(dir / "sigma_vs_n.csv",
            {"N", "rho_target", "epsilon", "samples", "ergm_mean_rho", "ergm_sigma_rho", "dmgg_mean_rho",
             "dmgg_sigma_rho", "dmgg_success_rate"},
            outputs);
    for (std::size_t ni = 0; ni < cfg.sizes.size(); ++ni) {
      ModelSpec spec = cfg.model;
      spec.n = cfg.sizes[ni];
      const Graph base = generate(spec, derive_seed(cfg.seed, 10 + ni));
      for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
        const double target = cfg.targets[ti];
        const Seed s = derive_seed(derive_seed(cfg.seed, 1000 + ni), ti);
        const ErgmEnsemble ens = ergm_ensemble(base, target, cfg.samples, cfg.ergm, derive_seed(s, 0), cfg.threads);
        const auto runs = dmgg_ensemble(base, target, cfg.epsilon, cfg.samples, actor,
                                        cfg.step_cap_per_edge * base.num_edges(), derive_seed(s, 1), cfg.threads);
        const Summary er = summarize(record_of(ens.samples).rho_samples);
        const Summary dr = summarize(record_of(successful(runs)).rho_samples);
        out.row(spec.n, target, cfg.epsilon, cfg.samples, er.mean, er.sd, dr.mean, dr.sd, success_rate(runs));
      }
    }
  } else if (kind == "entropy-vs-rho") {
    const Graph base = base_graph(cfg.model, 0);
    Csv out(dir / "entropy_vs_rho.csv", {"rho", "S_DI", "method", "samples", "mean_rho", "sigma_rho"}, outputs);
    for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
      const double target = cfg.targets[ti];
      const Seed s = derive_seed(cfg.seed, 100 + ti);
      const ErgmEnsemble ens = ergm_ensemble(base, target, cfg.samples, cfg.ergm, derive_seed(s, 0), cfg.threads);
      const EnsembleRecord er = record_of(ens.samples);
      const auto runs = dmgg_ensemble(base, target, cfg.epsilon, cfg.samples, actor,
                                      cfg.step_cap_per_edge * base.num_edges(), derive_seed(s, 1), cfg.threads);
      const EnsembleRecord dr = record_of(successful(runs));
      const Summary es = summarize(er.rho_samples);
      const Summary ds = summarize(dr.rho_samples);
      out.row(target, dyad_entropy(er), "ergm", er.num_samples, es.mean, es.sd);
      out.row(target, dr.num_samples > 0 ? dyad_entropy(dr) : 0.0, "dmgg", dr.num_samples, ds.mean, ds.sd);
    }
  } else if (kind == "cost-scaling") {
    struct Job {
      std::size_t ni, ti, si;
    };
    std::vector<Job> jobs;
    for (std::size_t ni = 0; ni < cfg.sizes.size(); ++ni)
      for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti)
        for (std::size_t si = 0; si < cfg.seeds; ++si) jobs.push_back({ni, ti, si});
    std::vector<CostSample> res(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
      ModelSpec spec = cfg.model;
      spec.n = cfg.sizes[jobs[j].ni];
      res[j] = cost_sample(spec, cfg.targets[jobs[j].ti], cfg.epsilon, actor, cfg.step_cap_per_edge, cfg.ergm,
                           derive_seed(cfg.seed, j));
      res[j].seed_index = jobs[j].si;
    });
    Csv out(dir / "cost_samples.csv", {"method", "N", "rho_target", "seed", "T", "converged", "lambda"}, outputs);
    std::vector<ScalingPoint> ergm_pts, dmgg_pts;
    for (const auto& c : res) out.row("ergm", c.n, c.target, c.seed_index, c.ergm_t, c.ergm_converged, c.lambda);
    for (const auto& c : res) out.row("dmgg", c.n, c.target, c.seed_index, c.dmgg_t, c.dmgg_success, c.lambda);
    for (const auto& c : res) {
      if (c.ergm_converged && c.ergm_t >= 1) ergm_pts.push_back({c.target, static_cast<double>(c.n), double(c.ergm_t)});
      if (c.dmgg_success && c.dmgg_t >= 1) dmgg_pts.push_back({c.target, static_cast<double>(c.n), double(c.dmgg_t)});
    }
    auto fit_json = [](const std::vector<ScalingPoint>& pts) -> nlohmann::json {
      try {
        const ScalingFit f = fit_scaling(pts);
        return {{"alpha", f.alpha}, {"alpha_se", f.alpha_se}, {"beta", f.beta},         {"beta_se", f.beta_se},
                {"intercept", f.intercept}, {"intercept_se", f.intercept_se}, {"r_squared", f.r_squared},
                {"points", f.num_points}};
      } catch (const Error& e) {
        return {{"error", e.what()}};
      }
    };
    const nlohmann::json fits = {
        {"ergm", fit_json(ergm_pts)},
        {"dmgg", fit_json(dmgg_pts)},
        {"reference_exponents",
         {{"ergm", {{"alpha", 1.51}, {"alpha_err", 0.08}, {"beta", 1.14}, {"beta_err", 0.29}}},
          {"dmgg", {{"alpha", 1.56}, {"alpha_err", 0.26}, {"beta", 0.86}, {"beta_err", 0.22}}}}}};
    std::ofstream(dir / "cost_fit.json") << fits.dump(2) << '\n';
    outputs.push_back("cost_fit.json");
    results = fits;
  } else if (kind == "topology-sweep") {
    Csv out(dir / "topology_sweep.csv",
            {"family", "rho_target", "runs", "success_rate", "mean_T", "mean_rho", "sigma_rho", "mean_c", "sd_c",
             "s_di"},
            outputs);
    for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
      ModelSpec spec = cfg.model;
      spec.family = cfg.families[fi];
      const Graph base = generate(spec, derive_seed(cfg.seed, 10 + fi));
      for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
        const auto runs = dmgg_ensemble(base, cfg.targets[ti], cfg.epsilon, cfg.samples, actor,
                                        cfg.step_cap_per_edge * base.num_edges(),
                                        derive_seed(derive_seed(cfg.seed, 1000 + fi), ti), cfg.threads);
        const EnsembleRecord rec = record_of(successful(runs));
        const Summary rho = summarize(rec.rho_samples);
        const Summary c = summarize(rec.clustering_samples);
        out.row(to_string(spec.family), cfg.targets[ti], runs.size(), success_rate(runs), mean_steps(runs), rho.mean,
                rho.sd, c.mean, c.sd, rec.num_samples > 0 ? dyad_entropy(rec) : 0.0);
      }
    }
  } else if (kind == "clustering-compare") {
    const Graph base = base_graph(cfg.model, 0);
    Csv out(dir / "clustering_samples.csv", {"rho_target", "sample", "clustering"}, outputs);
    std::vector<std::vector<double>> cs(cfg.targets.size());
    nlohmann::json per_target = nlohmann::json::array();
    for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
      const auto runs = dmgg_ensemble(base, cfg.targets[ti], cfg.epsilon, cfg.samples, actor,
                                      cfg.step_cap_per_edge * base.num_edges(), derive_seed(cfg.seed, 100 + ti),
                                      cfg.threads);
      for (const Graph& g : successful(runs)) cs[ti].push_back(clustering(g));
      for (std::size_t i = 0; i < cs[ti].size(); ++i) out.row(cfg.targets[ti], i, cs[ti][i]);
      const Summary s = summarize(cs[ti]);
      nlohmann::json entry = {{"rho_target", cfg.targets[ti]}, {"samples", cs[ti].size()},
                              {"mean_c", s.mean},            {"sd_c", s.sd},
                              {"success_rate", success_rate(runs)}};
      if (ti > 0 && cs[0].size() >= 5 && cs[ti].size() >= 5) {
        entry["p_value_vs_first"] = significance_test(cs[0], cs[ti]);
      }
      per_target.push_back(entry);
    }
    results = {{"targets", per_target}};
    std::ofstream(dir / "clustering_compare.json") << results.dump(2) << '\n';
    outputs.push_back("clustering_compare.json");
  } else if (kind == "flux-snapshots") {
    const Graph base = base_graph(cfg.model, 0);
    FluxSettings fs_cfg = cfg.flux;
    ErgmSettings es = cfg.ergm;
    if (cfg.lambda) es.fixed_lambda = cfg.lambda;
    const FluxComparison fc = flux_comparison(base, fs_cfg, actor, es, derive_seed(cfg.seed, 100), cfg.threads);
    Csv levels(dir / "flux_levels.csv", {"level", "method", "t", "window", "l1_norm", "total"}, outputs);
    nlohmann::json lv = nlohmann::json::array();
    for (const FluxLevel& fl : fc.levels) {
      for (int m = 0; m < 2; ++m) {
        const auto& t = m == 0 ? fl.t_dmgg : fl.t_ergm;
        const FluxMatrix& f = m == 0 ? fl.dmgg : fl.ergm;
        const char* name = m == 0 ? "dmgg" : "ergm";
        if (!t) continue;
        levels.row(fl.level, name, *t, fc.window, f.l1_norm(), f.total());
        const std::string file = std::string("flux_") + name + "_" + level_tag(fl.level) + ".csv";
        std::ofstream fo(dir / file);
        write_flux_csv(fo, f);
        outputs.push_back(file);
      }
      nlohmann::json e = {{"level", fl.level}};
      if (fl.t_dmgg && fl.t_ergm && fl.ergm.l1_norm() > 0.0) e["l1_ratio"] = fl.dmgg.l1_norm() / fl.ergm.l1_norm();
      lv.push_back(e);
    }
    Csv traces(dir / "mean_traces.csv", {"step", "dmgg_rho", "ergm_rho"}, outputs);
    const std::size_t len = std::max(fc.mean_trace_dmgg.size(), fc.mean_trace_ergm.size());
    const std::size_t stride = std::max<std::size_t>(1, len / 2000);
    for (std::size_t t = 0; t < len; t += stride) {
      auto at = [t](const std::vector<double>& v) { return v.empty() ? 0.0 : v[std::min(t, v.size() - 1)]; };
      traces.row(t, at(fc.mean_trace_dmgg), at(fc.mean_trace_ergm));
    }
    results = {{"lambda", fc.lambda}, {"window", fc.window}, {"levels", lv}};
  }

  nlohmann::json manifest = {
      {"schema_version", kConfigSchemaVersion},
      {"library", kLibraryVersion},
      {"kind", kind},
      {"config", to_json(cfg)},
      {"seed", cfg.seed.value},
      {"outputs", outputs},
      {"results", results},
      {"defaults",
       {{"swap_budget_per_edge", 20},
        {"target_margin", 0.1},
        {"mask_probes", 32},
        {"greedy_pool", cfg.pool_size},
        {"transient_band_sigmas", 2.0},
        {"transient_tail_fraction", 0.25},
        {"transient_min_window", 100},
        {"invalid_proposal_cap", kInvalidProposalCap},
        {"tune_tolerance", cfg.ergm.tune.tolerance},
        {"reward", {{"zeta", 0.005}, {"step_penalty", 0.001}, {"success_bonus", 100.0}, {"gamma", 0.997}}}}}};
  std::ofstream mf(dir / "manifest.json", std::ios::trunc);
  mf << manifest.dump(2) << '\n';
  if (!mf) throw Error(ErrorKind::Io, "cannot write manifest in " + cfg.out_dir);
  return manifest;
}

}  // namespace assortgen
