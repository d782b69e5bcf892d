#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "assortgen/config.hpp"
#include "assortgen/experiment.hpp"
#include "oracles.hpp"

using namespace assortgen;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("assortgen_exp_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ExperimentConfig small(const std::string& kind, const fs::path& dir) {
  ExperimentConfig c;
  c.kind = kind;
  c.model.family = Family::ER;
  c.model.n = 100;
  c.model.mean_degree = 4.0;
  c.sizes = {60, 120};
  c.samples = 10;
  c.seed = Seed{3};
  c.ergm.chain_steps_per_edge = 100;
  c.out_dir = dir.string();
  return c;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config parsing is strict") {
    ExperimentConfig c;
    apply_experiment_json({{"kind", "dmgg"}, {"samples", 7}, {"model", {{"family", "BA"}, {"n", 50}}}}, c);
    CHECK(c.kind == "dmgg");
    CHECK(c.samples == 7);
    CHECK(c.model.family == Family::BA);
    CHECK(c.model.n == 50);
    CHECK(oracle::error_kind([] {
            ExperimentConfig x;
            apply_experiment_json({{"kind", "dmgg"}, {"sampels", 7}}, x);
          }) == ErrorKind::Config);
    CHECK(oracle::error_kind([] {
            ExperimentConfig x;
            apply_experiment_json({{"kind", "dmgg"}, {"flux", {{"bogus", 1}}}}, x);
          }) == ErrorKind::Config);
    CHECK(oracle::error_kind([] {
            ExperimentConfig x;
            apply_experiment_json({{"kind", "nope"}}, x);
            x.validate();
          }) == ErrorKind::Config);

    const fs::path dir = temp_dir("cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << R"({"schema_version": 99, "kind": "dmgg"})";
    CHECK(oracle::error_kind([&] { load_config_file((dir / "bad.json").string()); }) == ErrorKind::Config);
    std::ofstream(dir / "none.json") << R"({"kind": "dmgg"})";
    CHECK(oracle::error_kind([&] { load_config_file((dir / "none.json").string()); }) == ErrorKind::Config);

    ExperimentConfig round;
    round.kind = "sigma-vs-N";
    round.samples = 12;
    ExperimentConfig back;
    apply_experiment_json(to_json(round), back);
    CHECK(to_json(back) == to_json(round));
  }

  TEST_CASE("ERGM transient from averaged chains") {
    const Graph base = generate(ModelSpec{Family::ER, 300, 6.0}, Seed{4});
    const Graph start = randomize_configuration(base, Seed{1}, default_swap_budget(base));
    const double lambda = tune_lambda(base, 0.4, Seed{2}).lambda;
    ErgmSettings es;
    const auto t = ergm_transient(start, lambda, es, Seed{3}, 1);
    REQUIRE(t.has_value());
    CHECK(*t > 0);
    CHECK(*t < 50 * base.num_edges());
    CHECK(ergm_transient(start, lambda, es, Seed{3}, 3) == t);
    // at lambda = 0 a randomized start is already stationary
    const auto t0 = ergm_transient(start, 0.0, es, Seed{3}, 1);
    REQUIRE(t0.has_value());
    CHECK(*t0 < *t);
  }

  TEST_CASE("sigma-vs-N writes one row per size and target, reproducibly") {
    const fs::path dir = temp_dir("sigma");
    const ExperimentConfig c = small("sigma-vs-N", dir);
    const nlohmann::json m = run_experiment(c);
    const auto rows = lines(dir / "sigma_vs_n.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] ==
          "N,rho_target,epsilon,samples,ergm_mean_rho,ergm_sigma_rho,dmgg_mean_rho,dmgg_sigma_rho,dmgg_success_rate");
    CHECK(m.at("kind") == "sigma-vs-N");
    CHECK(m.at("seed") == 3);
    CHECK(fs::exists(dir / "manifest.json"));
    const std::string first = slurp(dir / "sigma_vs_n.csv");
    run_experiment(c);
    CHECK(slurp(dir / "sigma_vs_n.csv") == first);
  }

  TEST_CASE("entropy-vs-rho reports both methods") {
    const fs::path dir = temp_dir("entropy");
    ExperimentConfig c = small("entropy-vs-rho", dir);
    c.targets = {0.0, 0.3};
    run_experiment(c);
    const auto rows = lines(dir / "entropy_vs_rho.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows[1].find(",ergm,") != std::string::npos);
    CHECK(rows[2].find(",dmgg,") != std::string::npos);
  }

  TEST_CASE("input graphs are read but not modified") {
    const fs::path dir = temp_dir("input");
    fs::create_directories(dir);
    const Graph g = generate(ModelSpec{Family::ER, 80, 4.0}, Seed{1});
    write_edge_list_file((dir / "g.txt").string(), g);
    const std::string before = slurp(dir / "g.txt");
    ExperimentConfig c = small("dmgg", dir / "out");
    c.input = (dir / "g.txt").string();
    c.targets = {0.2};
    run_experiment(c);
    CHECK(slurp(dir / "g.txt") == before);
    CHECK(lines(dir / "out" / "runs.csv").size() == 11);
  }

  TEST_CASE("error paths") {
    ExperimentConfig c = small("dmgg", temp_dir("missing"));
    c.actor = ActorKind::Policy;
    CHECK(oracle::error_kind([&] { run_experiment(c); }) == ErrorKind::MissingCheckpoint);
    c.checkpoint = "/nonexistent/ckpt";
    CHECK(oracle::error_kind([&] { run_experiment(c); }) == ErrorKind::MissingCheckpoint);

    const fs::path blocker = temp_dir("blocker");
    std::ofstream(blocker) << "file";
    ExperimentConfig d = small("generate", blocker / "sub");
    CHECK(oracle::error_kind([&] { run_experiment(d); }) == ErrorKind::Io);
    fs::remove(blocker);
  }

  TEST_CASE("cost-scaling and flux-snapshots run at small scale") {
    const fs::path dir = temp_dir("cost");
    ExperimentConfig c = small("cost-scaling", dir);
    c.sizes = {60, 120};
    c.targets = {0.2, 0.3};
    c.seeds = 2;
    const nlohmann::json m = run_experiment(c);
    CHECK(lines(dir / "cost_samples.csv").size() == 1 + 2 * 2 * 2 * 2);
    CHECK(m.at("results").contains("reference_exponents"));

    const fs::path fdir = temp_dir("flux");
    ExperimentConfig f = small("flux-snapshots", fdir);
    f.flux.target = 0.5;
    f.flux.runs = 4;
    f.flux.levels = {0.2, 0.4};
    const nlohmann::json fm = run_experiment(f);
    CHECK(fm.at("results").at("levels").size() == 2);
    const auto rows = lines(fdir / "flux_levels.csv");
    CHECK(rows.size() >= 3);
    CHECK(fs::exists(fdir / "mean_traces.csv"));
  }
}
