#include <doctest.h>

#include "assortgen/generators.hpp"
#include "assortgen/metrics.hpp"
#include "assortgen/rewire.hpp"
#include "oracles.hpp"

using namespace assortgen;

namespace {

std::size_t slot_of(const Graph& g, Node a, Node b) {
  const Edge e = make_edge(a, b);
  for (std::size_t i = 0; i < g.num_edges(); ++i)
    if (g.edge(i) == e) return i;
  FAIL("edge not found");
  return 0;
}

// Random simple graph on n <= 7 nodes with each pair present with prob 1/2.
Graph random_small(Rng& rng) {
  const std::size_t n = 4 + uniform_index(rng, 4);
  std::vector<std::pair<Node, Node>> p;
  for (Node a = 0; a < n; ++a)
    for (Node b = a + 1; b < n; ++b)
      if (uniform01(rng) < 0.5) p.push_back({a, b});
  return oracle::make(n, p);
}

}  // namespace

TEST_SUITE("rewire") {
  TEST_CASE("mode pairings") {
    const auto [a0, b0] = pair_for_mode(Edge{0, 1}, Edge{2, 3}, 0);
    CHECK(a0 == Edge{0, 2});
    CHECK(b0 == Edge{1, 3});
    const auto [a1, b1] = pair_for_mode(Edge{0, 1}, Edge{2, 3}, 1);
    CHECK(a1 == Edge{0, 3});
    CHECK(b1 == Edge{1, 2});
  }

  TEST_CASE("validity on a path") {
    const Graph g = oracle::path4();
    const std::size_t e01 = slot_of(g, 0, 1), e12 = slot_of(g, 1, 2), e23 = slot_of(g, 2, 3);
    CHECK(is_valid(g, {e01, e23, 0}));
    // (0,1) with (1,2) under mode 1 makes (0,2),(1,1)
    CHECK_FALSE(is_valid(g, {e01, e12, 1}));
    CHECK_FALSE(is_valid(g, {e01, e01, 0}));
    CHECK(oracle::error_kind([&] { delta_k(g, {e01, e12, 1}); }) == ErrorKind::InvalidAction);
  }

  TEST_CASE("star has no valid action") {
    const Graph g = oracle::star4();
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (int b = 0; b < 2; ++b) CHECK_FALSE(is_valid(g, {i, j, b}));
  }

  TEST_CASE("delta K arithmetic") {
    // degrees u=3, v=1, x=2, y=2 around e1=(u,v), e2=(x,y)
    const Graph g = oracle::make(8, {{0, 1}, {0, 4}, {0, 5}, {2, 3}, {2, 6}, {3, 7}});
    const std::size_t e1 = slot_of(g, 0, 1), e2 = slot_of(g, 2, 3);
    CHECK(delta_k(g, {e1, e2, 0}) == 3 * 2 + 1 * 2 - 3 * 1 - 2 * 2);
    const Graph m = oracle::make(4, {{0, 1}, {2, 3}});
    CHECK(delta_k(m, {0, 1, 0}) == 0);
    CHECK(delta_k(m, {0, 1, 1}) == 0);
  }

  TEST_CASE("delta K and delta rho match recomputation on all actions of small graphs") {
    Rng rng(17);
    std::size_t checked = 0;
    for (int trial = 0; trial < 2000; ++trial) {
      const Graph g = random_small(rng);
      const auto ctx = DegreeSequenceContext::of(g);
      for (std::size_t i = 0; i < g.num_edges(); ++i)
        for (std::size_t j = 0; j < g.num_edges(); ++j)
          for (int b = 0; b < 2; ++b) {
            const RewiringAction a{i, j, b};
            if (!is_valid(g, a)) continue;
            Graph h = g;
            apply(h, a);
            const std::int64_t dk = delta_k(g, a);
            REQUIRE(dk == oracle::k_sum(h) - oracle::k_sum(g));
            if (!ctx.degenerate()) {
              REQUIRE(std::abs(oracle::assortativity(h) - oracle::assortativity(g) - delta_rho(ctx, dk)) < 1e-10);
            }
            ++checked;
          }
    }
    CHECK(checked > 10000);
  }

  TEST_CASE("delta rho on the path context") {
    const auto ctx = DegreeSequenceContext::of(oracle::path4());
    CHECK(ctx.num_edges == 3);
    CHECK(ctx.mu == doctest::Approx(5.0 / 3.0));
    CHECK(ctx.denom == doctest::Approx(2.0 / 9.0));
    CHECK(delta_rho(ctx, 0) == 0.0);
    // rho is affine in K with slope 1 / (E D)
    CHECK(delta_rho(ctx, 1) == doctest::Approx(1.0 / (3.0 * 2.0 / 9.0)));
    CHECK(oracle::error_kind([] { delta_rho(DegreeSequenceContext::of(oracle::cycle(5)), 1); }) ==
          ErrorKind::Degenerate);
  }

  TEST_CASE("apply on a path and its inverse") {
    Graph g = oracle::path4();
    const Graph before = g;
    const RewiringAction a{slot_of(g, 0, 1), slot_of(g, 2, 3), 0};
    const RewiringAction inv = inverse(g, a);
    apply(g, a);
    CHECK(g.has_edge(0, 2));
    CHECK(g.has_edge(1, 3));
    CHECK(g.degrees() == std::vector<int>{1, 2, 2, 1});
    g.check_invariants();
    apply(g, inv);
    CHECK(g == before);
  }

  TEST_CASE("invalid apply leaves the graph untouched") {
    Graph g = oracle::path4();
    const Graph before = g;
    CHECK(oracle::error_kind([&] { apply(g, {0, 1, 1}); }) == ErrorKind::InvalidAction);
    CHECK(g == before);
    CHECK(oracle::error_kind([&] { apply(g, {0, 9, 0}); }) == ErrorKind::InvalidAction);
  }

  TEST_CASE("random valid applications keep invariants") {
    Graph g = generate(ModelSpec{Family::ER, 200, 6.0}, Seed{8});
    const auto deg = g.degree_sequence();
    Rng rng(5);
    std::int64_t k = k_sum(g);
    int applied = 0;
    while (applied < 1000) {
      const RewiringAction a = random_action(g, rng);
      if (!is_valid(g, a)) continue;
      const Graph before = g;
      k += delta_k(g, a);
      const RewiringAction inv = inverse(g, a);
      apply(g, a);
      g.check_invariants();
      ++applied;
      if (applied % 100 == 0) {
        Graph back = g;
        apply(back, inv);
        CHECK(back == before);
      }
    }
    CHECK(g.degree_sequence() == deg);
    CHECK(k == oracle::k_sum(g));
  }

  TEST_CASE("random action is uniform over ordered slot pairs and modes") {
    const Graph g = oracle::make(6, {{0, 1}, {2, 3}, {4, 5}});
    Rng rng(3);
    std::map<std::tuple<std::size_t, std::size_t, int>, int> counts;
    const int draws = 60000;
    for (int i = 0; i < draws; ++i) {
      const auto a = random_action(g, rng);
      CHECK(a.e1 != a.e2);
      ++counts[{a.e1, a.e2, a.mode}];
    }
    CHECK(counts.size() == 12);
    for (const auto& [key, c] : counts) CHECK(std::abs(c - draws / 12.0) < 5 * std::sqrt(draws / 12.0));
  }
}
