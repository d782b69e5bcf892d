#include <doctest.h>

#include <sstream>

#include "assortgen/generators.hpp"
#include "assortgen/metrics.hpp"
#include "assortgen/rewire.hpp"
#include "oracles.hpp"

using namespace assortgen;

TEST_SUITE("metrics") {
  TEST_CASE("assortativity of small graphs") {
    CHECK(assortativity(oracle::path4()) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(oracle::assortativity(oracle::path4()) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(assortativity(oracle::star4()) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(oracle::error_kind([] { assortativity(oracle::cycle(5)); }) == ErrorKind::Degenerate);
    CHECK(oracle::error_kind([] { assortativity(Graph::from_edge_list(3, std::span<const Edge>{})); }) ==
          ErrorKind::Degenerate);
  }

  TEST_CASE("assortativity agrees with the Pearson oracle on generated graphs") {
    for (Family f : {Family::ER, Family::BA, Family::HK, Family::CL}) {
      const Graph g = generate(ModelSpec{f, 300, 6.0}, Seed{2});
      CHECK(assortativity(g) == doctest::Approx(oracle::assortativity(g)).epsilon(1e-10));
    }
  }

  TEST_CASE("K sum") {
    CHECK(k_sum(oracle::star4()) == 9);
    CHECK(k_sum(oracle::path4()) == 8);
    CHECK(k_sum(Graph::from_edge_list(4, std::span<const Edge>{})) == 0);
  }

  TEST_CASE("rho from K reproduces the full value") {
    const Graph g = generate(ModelSpec{Family::BA, 200, 6.0}, Seed{1});
    const auto ctx = DegreeSequenceContext::of(g);
    CHECK(assortativity_from_k(k_sum(g), ctx.num_edges, ctx.mu, ctx.denom) ==
          doctest::Approx(assortativity(g)).epsilon(1e-12));
  }

  TEST_CASE("clustering") {
    CHECK(clustering(Graph::from_edge_list(3, std::span<const Edge>{})) == 0.0);
    CHECK(clustering(oracle::triangle()) == doctest::Approx(1.0));
    CHECK(clustering(oracle::star4()) == 0.0);
    const Graph hk = generate(ModelSpec{Family::HK, 200, 6.0}, Seed{4});
    CHECK(clustering(hk) == doctest::Approx(oracle::clustering(hk)).epsilon(1e-12));
  }

  TEST_CASE("clustering of sparse ER graphs is about k / N") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const double c = clustering(generate(ModelSpec{Family::ER, 1000, 6.0}, Seed{s}));
      CHECK(std::abs(c - 0.006) <= 0.004);
    }
  }

  TEST_CASE("joint degree matrix") {
    const auto js = joint_degree_matrix(oracle::star4());
    CHECK(js.counts() == std::map<DegreePair, std::int64_t>{{{1, 3}, 3}});
    const auto jp = joint_degree_matrix(oracle::path4());
    CHECK(jp.counts() == std::map<DegreePair, std::int64_t>{{{1, 2}, 2}, {{2, 2}, 1}});
    CHECK(jp.at(2, 1) == 2);
    const Graph g = generate(ModelSpec{Family::BA, 300, 6.0}, Seed{2});
    CHECK(joint_degree_matrix(g).total() == static_cast<std::int64_t>(g.num_edges()));
  }

  TEST_CASE("flux of a single swap") {
    // star on 0 plus the path 4-5-6
    Graph g = oracle::make(7, {{0, 1}, {0, 2}, {0, 3}, {4, 5}, {5, 6}});
    std::size_t e1 = 0, e2 = 0;
    for (std::size_t i = 0; i < g.num_edges(); ++i) {
      if (g.edge(i) == Edge{0, 1}) e1 = i;
      if (g.edge(i) == Edge{5, 6}) e2 = i;
    }
    JdmTrajectory traj{joint_degree_matrix(g)};
    traj.push_back(traj.back());
    apply(g, {e1, e2, 0});  // (0,5) and (1,6)
    traj.push_back(joint_degree_matrix(g));
    const std::vector<JdmTrajectory> runs{traj};
    CHECK(flux(runs, 0).values.empty());
    const FluxMatrix f = flux(runs, 1);
    CHECK(f.values == std::map<DegreePair, double>{{{1, 1}, 1.0}, {{1, 2}, -1.0}, {{1, 3}, -1.0}, {{2, 3}, 1.0}});
    CHECK(f.total() == 0.0);
    CHECK(f.l1_norm() == 4.0);
    CHECK(windowed_flux(runs, 0, 2).values.at({2, 3}) == 0.5);

    JdmTrajectory reversed{traj[2], traj[1]};
    const std::vector<JdmTrajectory> both{JdmTrajectory{traj[1], traj[2]}, reversed};
    CHECK(flux(both, 0).values.empty());
    CHECK(oracle::error_kind([&] { flux(runs, 2); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("flux totals vanish under rewiring") {
    Graph g = generate(ModelSpec{Family::BA, 200, 6.0}, Seed{6});
    Rng rng(2);
    JdmTrajectory traj{joint_degree_matrix(g)};
    for (int s = 0; s < 50; ++s) {
      RewiringAction a = random_action(g, rng);
      while (!is_valid(g, a)) a = random_action(g, rng);
      apply(g, a);
      traj.push_back(joint_degree_matrix(g));
    }
    const std::vector<JdmTrajectory> runs{traj};
    for (std::size_t t = 0; t < 50; ++t) CHECK(std::abs(flux(runs, t).total()) < 1e-12);
  }

  TEST_CASE("dyad entropy") {
    EnsembleRecord same;
    const Graph p = oracle::path4();
    same.add_sample(p, -0.5, 0.0);
    same.add_sample(p, -0.5, 0.0);
    CHECK(dyad_entropy(same) == 0.0);

    EnsembleRecord two;
    two.add_sample(oracle::make(4, {{0, 1}, {2, 3}}), 0, 0);
    two.add_sample(oracle::make(4, {{0, 2}, {1, 3}}), 0, 0);
    CHECK(dyad_entropy(two) == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));

    CHECK(oracle::error_kind([] { dyad_entropy(EnsembleRecord{}); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("dyad entropy is largest for equal presence frequencies") {
    EnsembleRecord flat;
    flat.num_samples = 10;
    flat.num_edges = 4;
    for (std::uint64_t k = 0; k < 8; ++k) flat.edge_presence[k] = 5;
    const double base = dyad_entropy(flat);
    for (std::uint64_t a = 0; a < 8; ++a) {
      EnsembleRecord tilted = flat;
      tilted.edge_presence[a] += 1;
      tilted.edge_presence[(a + 3) % 8] -= 1;
      CHECK(dyad_entropy(tilted) < base);
    }
  }

  TEST_CASE("ensemble record merge is associative and commutative") {
    std::vector<EnsembleRecord> parts(3);
    Rng rng(4);
    const Graph base = generate(ModelSpec{Family::ER, 40, 4.0}, Seed{1});
    for (int i = 0; i < 9; ++i) {
      const Graph g = randomize_configuration(base, Seed{static_cast<std::uint64_t>(i)}, 200);
      parts[i % 3].add_sample(g, assortativity(g), clustering(g));
    }
    EnsembleRecord ab = parts[0];
    ab.merge(parts[1]);
    ab.merge(parts[2]);
    EnsembleRecord bc = parts[1];
    bc.merge(parts[2]);
    EnsembleRecord a_bc = parts[0];
    a_bc.merge(bc);
    EnsembleRecord cba = parts[2];
    cba.merge(parts[1]);
    cba.merge(parts[0]);
    CHECK(ab.num_samples == 9);
    CHECK(dyad_entropy(ab) == dyad_entropy(a_bc));
    CHECK(dyad_entropy(ab) == dyad_entropy(cba));
    CHECK(ab.edge_presence == cba.edge_presence);
  }

  TEST_CASE("ensemble statistics") {
    EnsembleRecord r;
    r.rho_samples = {0.4, 0.4};
    CHECK(ensemble_stats(r).mean_rho == doctest::Approx(0.4));
    CHECK(ensemble_stats(r).sigma_rho == doctest::Approx(0.0));
    r.rho_samples = {0.3, 0.5};
    CHECK(ensemble_stats(r).sigma_rho == doctest::Approx(0.1));
    r.rho_samples = {0.3};
    CHECK(oracle::error_kind([&] { ensemble_stats(r); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("feasible range") {
    const FeasibleRange s = feasible_range(oracle::star4(), Seed{1});
    CHECK(s.rho_min == doctest::Approx(-1.0));
    CHECK(s.rho_max == doctest::Approx(-1.0));

    ModelSpec spec{Family::ER, 1000, 6.0};
    spec.num_edges = 3000;
    const Graph g = generate(spec, Seed{1});
    std::vector<double> trace;
    const FeasibleRange r = feasible_range(g, Seed{2}, 50, &trace);
    CHECK(r.rho_max >= 0.8);
    CHECK(r.rho_min <= -0.8);
    for (std::size_t i = 1; i < trace.size(); ++i) REQUIRE(trace[i] >= trace[i - 1]);
  }

  TEST_CASE("csv export") {
    std::ostringstream out;
    write_jdm_csv(out, joint_degree_matrix(oracle::path4()));
    CHECK(out.str() == "k1,k2,value\n1,1,0\n1,2,2\n2,1,2\n2,2,1\n");
  }
}
