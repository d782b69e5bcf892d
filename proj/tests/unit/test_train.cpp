#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "assortgen/checkpoint.hpp"
#include "assortgen/metrics.hpp"
#include "assortgen/train.hpp"
#include "oracles.hpp"

using namespace assortgen;

namespace {

TrainConfig tiny_config() {
  TrainConfig tc;
  tc.arch = Architecture{1, 8, 10.0, 100.0};
  tc.domain.families = {Family::ER};
  tc.domain.n_min = 40;
  tc.domain.n_max = 60;
  tc.domain.k_min = tc.domain.k_max = 4.0;
  tc.domain.rho_min = -0.3;
  tc.domain.rho_max = 0.3;
  tc.rollout_steps = 128;
  tc.total_steps = 384;
  tc.num_envs = 4;
  tc.ppo.minibatch = 64;
  tc.ppo.epochs = 2;
  tc.eval_interval = 1;
  tc.probe_episodes = 4;
  tc.step_cap_per_edge = 2;
  tc.seed = Seed{5};
  return tc;
}

}  // namespace

TEST_SUITE("train") {
  TEST_CASE("episode sampling") {
    DomainSampler d;
    d.families = {Family::ER, Family::BA};
    d.n_min = 100;
    d.n_max = 200;
    d.rho_abs_min = 0.1;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const EpisodeSpec a = sample_episode(d, Seed{s});
      const EpisodeSpec b = sample_episode(d, Seed{s});
      CHECK(a.graph == b.graph);
      CHECK(a.rho_target == b.rho_target);
      CHECK(a.graph.num_nodes() >= 100);
      CHECK(a.graph.num_nodes() <= 200);
      CHECK(a.rho_target >= d.rho_min);
      CHECK(a.rho_target <= d.rho_max);
      const FeasibleRange fr = feasible_range(a.graph, Seed{1});
      CHECK(a.rho_target > fr.rho_min);
      CHECK(a.rho_target < fr.rho_max);
    }
  }

  TEST_CASE("config validation") {
    TrainConfig tc = tiny_config();
    tc.validate();
    tc.num_envs = 0;
    CHECK(oracle::error_kind([&] { tc.validate(); }).has_value());
    tc = tiny_config();
    tc.domain.rho_min = 0.5;
    tc.domain.rho_max = 0.1;
    CHECK(oracle::error_kind([&] { tc.validate(); }).has_value());
    tc = tiny_config();
    tc.reward.gamma = 1.5;
    CHECK(oracle::error_kind([&] { tc.validate(); }).has_value());
  }

  TEST_CASE("greedy probes succeed") {
    DomainSampler d;
    d.families = {Family::ER};
    d.n_min = d.n_max = 100;
    const auto probes = make_probe_set(d, 6, Seed{3});
    const ProbeStats s = evaluate_probes(probes, Actor{}, 0.005, 10, Seed{1}, 2);
    CHECK(s.success_rate == 1.0);
    CHECK(s.mean_t > 0.0);
  }

  TEST_CASE("short training run writes outputs and is deterministic") {
    const auto dir = std::filesystem::temp_directory_path() / "assortgen_test_train";
    std::filesystem::remove_all(dir);
    TrainConfig tc = tiny_config();
    tc.out_dir = dir.string();
    std::size_t rows = 0;
    const TrainResult a = train(tc, [&](const CurveRow&) { ++rows; });
    CHECK(a.env_steps >= tc.total_steps);
    CHECK(rows == a.curve.size());
    CHECK(a.curve.size() == 3);
    std::ifstream curve(dir / "training_curve.csv");
    std::string header;
    std::getline(curve, header);
    CHECK(header == "env_steps,mean_reward,success_rate,mean_T,kl,clip_frac");
    const Checkpoint ck = load_checkpoint((dir / "checkpoint").string());
    CHECK(ck.params.data() == a.params.data());
    CHECK(ck.train_config.at("terminate_on_success") == true);

    tc.out_dir.clear();
    CHECK(train(tc).params.data() == a.params.data());
    tc.threads = 2;
    CHECK(train(tc).params.data() == train(tc).params.data());
  }
}
