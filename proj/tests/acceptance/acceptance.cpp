// Acceptance run: one PASS/FAIL line per criterion.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>

#include "assortgen/analysis.hpp"
#include "assortgen/experiment.hpp"
#include "assortgen/metrics.hpp"
#include "assortgen/parallel.hpp"
#include "assortgen/train.hpp"
#include "netcheck.hpp"
#include "oracles.hpp"

using namespace assortgen;

namespace {

struct Outcome {
  bool pass{false};
  std::string detail;
};

struct Context {
  std::size_t threads{1};
  std::filesystem::path work;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

// ER with exactly 3N edges, so <k> = 6.
Graph er(std::size_t n, std::uint64_t seed) {
  ModelSpec spec{Family::ER, n, 6.0};
  spec.num_edges = 3 * n;
  return generate(spec, Seed{seed});
}

std::vector<double> rhos(const std::vector<Graph>& gs) {
  std::vector<double> out;
  for (const Graph& g : gs) out.push_back(assortativity(g));
  return out;
}

std::vector<Graph> successes(const std::vector<EpisodeResult>& runs) {
  std::vector<Graph> out;
  for (const auto& r : runs)
    if (r.success) out.push_back(r.final_graph);
  return out;
}

EnsembleRecord record(const std::vector<Graph>& gs) {
  EnsembleRecord rec;
  for (const Graph& g : gs) rec.add_sample(g, assortativity(g), clustering(g));
  return rec;
}

// 1: hard constraint on ER N=1000, E=3000.
Outcome hard_constraint(const Context& c) {
  const Graph base = er(1000, 101);
  const double target = 0.4, eps = 0.001;
  const auto t0 = std::chrono::steady_clock::now();
  const auto runs = dmgg_ensemble(base, target, eps, 200, Actor{}, 1000 * base.num_edges(), Seed{1}, c.threads);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t ok = 0, within = 0;
  double worst = 0.0;
  for (const auto& r : runs) {
    if (!r.success) continue;
    ++ok;
    const double dev = std::abs(oracle::assortativity(r.final_graph) - target);
    worst = std::max(worst, dev);
    if (dev <= eps) ++within;
  }
  const double rate = static_cast<double>(ok) / static_cast<double>(runs.size());
  return {base.num_edges() == 3000 && rate >= 0.99 && within == ok,
          fmt("E=%zu success=%.3f within_eps=%zu/%zu max|rho-rho*|=%.2e runtime=%.1fs", base.num_edges(), rate,
              within, ok, worst, secs)};
}

// 2: canonical ensemble on the same graph.
Outcome soft_constraint(const Context& c) {
  const Graph base = er(1000, 101);
  const ErgmEnsemble ens = ergm_ensemble(base, 0.4, 200, ErgmSettings{}, Seed{2}, c.threads);
  const auto r = rhos(ens.samples);
  const double m = mean(r), s = sd(r);
  return {ens.samples.size() == 200 && std::abs(m - 0.4) <= 0.02 && s > 0.001,
          fmt("lambda=%.5f burn_in=%zu <rho>=%.4f sigma=%.4f (eps 0.001)", ens.tune.lambda, ens.burn_in, m, s)};
}

// 3: sigma scaling with N.
Outcome sigma_scaling(const Context& c) {
  const std::vector<std::size_t> sizes{100, 400, 1600};
  const double eps = 0.001;
  bool pass = true;
  std::string detail;
  for (double target : {-0.4, 0.4}) {
    std::vector<double> se, sd_dmgg;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const Graph base = er(sizes[i], 300 + i);
      const Seed s{static_cast<std::uint64_t>(3000 + 10 * i + (target > 0))};
      const ErgmEnsemble ens = ergm_ensemble(base, target, 100, ErgmSettings{}, derive_seed(s, 0), c.threads);
      const auto runs = dmgg_ensemble(base, target, eps, 100, Actor{}, 1000 * base.num_edges(), derive_seed(s, 1),
                                      c.threads);
      se.push_back(sd(rhos(ens.samples)));
      const auto ok = successes(runs);
      sd_dmgg.push_back(ok.empty() ? INFINITY : sd(rhos(ok)));
      if (ok.size() != runs.size()) pass = false;
    }
    for (std::size_t i = 0; i + 1 < se.size(); ++i)
      if (!(se[i + 1] < se[i])) pass = false;
    for (double d : sd_dmgg)
      if (!(d <= eps)) pass = false;
    detail += fmt("rho*=%+.1f ergm_sigma=[%.4f %.4f %.4f] dmgg_sigma=[%.1e %.1e %.1e]; ", target, se[0], se[1], se[2],
                  sd_dmgg[0], sd_dmgg[1], sd_dmgg[2]);
  }
  return {pass, detail};
}

// 4: entropy diversity at N=300.
Outcome entropy(const Context& c) {
  const Graph base = er(300, 401);
  const std::vector<double> targets{-0.4, 0.0, 0.4};
  std::vector<double> s_ergm, s_dmgg;
  bool pass = base.num_edges() == 900;
  std::string detail = fmt("E=%zu ", base.num_edges());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Seed s{400 + i};
    const ErgmEnsemble ens = ergm_ensemble(base, targets[i], 300, ErgmSettings{}, derive_seed(s, 0), c.threads);
    const auto runs = dmgg_ensemble(base, targets[i], 0.005, 300, Actor{}, 1000 * base.num_edges(),
                                    derive_seed(s, 1), c.threads);
    const auto ok = successes(runs);
    if (ok.size() != runs.size()) pass = false;
    s_ergm.push_back(dyad_entropy(record(ens.samples)));
    s_dmgg.push_back(dyad_entropy(record(ok)));
    const double gap = (s_ergm[i] - s_dmgg[i]) / s_ergm[i];
    if (!(s_dmgg[i] <= s_ergm[i]) || !(gap <= 0.10)) pass = false;
    detail += fmt("rho=%+.1f S_ergm=%.2f S_dmgg=%.2f gap=%.2f%%; ", targets[i], s_ergm[i], s_dmgg[i], 100 * gap);
  }
  for (const auto* s : {&s_ergm, &s_dmgg})
    if (!((*s)[1] > (*s)[0] && (*s)[1] > (*s)[2])) pass = false;
  return {pass, detail};
}

// 5: seed-matched cost comparison. The +-0.2 cells only feed the exponent fit.
Outcome efficiency(const Context& c) {
  const std::vector<std::size_t> sizes{100, 400, 1600};
  const std::vector<double> targets{-0.4, 0.4, -0.2, 0.2};
  const std::size_t seeds = 5;
  std::vector<CostSample> res(sizes.size() * targets.size() * seeds);
  parallel_for(res.size(), c.threads, [&](std::size_t j) {
    const std::size_t ni = j / (targets.size() * seeds), ti = (j / seeds) % targets.size();
    res[j] = cost_sample(ModelSpec{Family::ER, sizes[ni], 6.0}, targets[ti], 0.005, Actor{}, 1000, ErgmSettings{},
                         derive_seed(Seed{5}, j));
  });
  bool pass = true;
  std::string detail;
  std::vector<ScalingPoint> pe, pd;
  for (std::size_t cell = 0; cell < sizes.size() * targets.size(); ++cell) {
    double te = 0, td = 0;
    std::size_t incomplete = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const CostSample& x = res[cell * seeds + s];
      te += static_cast<double>(x.ergm_t);
      td += static_cast<double>(x.dmgg_t);
      if (!x.ergm_converged || !x.dmgg_success) ++incomplete;
      if (x.ergm_converged && x.ergm_t >= 1) pe.push_back({x.target, double(x.n), double(x.ergm_t)});
      if (x.dmgg_success && x.dmgg_t >= 1) pd.push_back({x.target, double(x.n), double(x.dmgg_t)});
    }
    const CostSample& first = res[cell * seeds];
    if (std::abs(first.target) != 0.4) continue;
    if (incomplete > 0 || !(td <= te / 3.0)) pass = false;
    detail += fmt("N=%zu rho*=%+.1f T_ergm=%.0f T_dmgg=%.0f ratio=%.0f incomplete=%zu; ", first.n, first.target,
                  te / seeds, td / seeds, te / std::max(td, 1.0), incomplete);
  }
  for (auto [name, pts] : {std::pair{"ergm", &pe}, std::pair{"dmgg", &pd}}) {
    try {
      const ScalingFit f = fit_scaling(*pts);
      detail += fmt("%s fit alpha=%.2f+-%.2f beta=%.2f+-%.2f; ", name, f.alpha, f.alpha_se, f.beta, f.beta_se);
    } catch (const Error& e) {
      detail += std::string(name) + " fit failed: " + e.what() + "; ";
    }
  }
  return {pass, detail};
}

Graph random_small(Rng& rng) {
  const std::size_t n = 4 + uniform_index(rng, 4);
  std::vector<std::pair<Node, Node>> p;
  for (Node a = 0; a < n; ++a)
    for (Node b = a + 1; b < n; ++b)
      if (uniform01(rng) < 0.5) p.push_back({a, b});
  return oracle::make(n, p);
}

// 6: exact oracles and stationary distribution.
Outcome oracles(const Context&) {
  Rng rng(6);
  std::size_t actions = 0, dk_bad = 0, rho_bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
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
          if (dk != oracle::k_sum(h) - oracle::k_sum(g)) ++dk_bad;
          if (!ctx.degenerate()) {
            const double err = std::abs(oracle::assortativity(g) + delta_rho(ctx, dk) - oracle::assortativity(h));
            worst = std::max(worst, err);
            if (err > 1e-10) ++rho_bad;
          }
          ++actions;
        }
  }

  const std::vector<int> deg{3, 3, 2, 2, 1, 1, 1, 1};
  const auto graphs = oracle::enumerate_graphs(deg);
  const double lambda = 0.3;
  std::map<std::uint64_t, double> target;
  double z = 0.0;
  for (const auto& edges : graphs) {
    const Graph g = Graph::from_edge_list(deg.size(), std::span<const Edge>(edges));
    const double w = std::exp(lambda * static_cast<double>(oracle::k_sum(g)));
    target[g.edge_set_hash()] = w;
    z += w;
  }
  ChainState st(Graph::from_edge_list(deg.size(), std::span<const Edge>(graphs.front())));
  Rng chain_rng(66);
  std::map<std::uint64_t, double> seen;
  const int samples = 400000;
  for (int i = 0; i < 5000; ++i) mh_step(st, lambda, chain_rng);
  for (int i = 0; i < samples; ++i) {
    for (int s = 0; s < 10; ++s) mh_step(st, lambda, chain_rng);
    seen[st.graph.edge_set_hash()] += 1.0;
  }
  double tv = 0.0;
  for (const auto& [h, w] : target) tv += std::abs(w / z - seen[h] / samples);
  for (const auto& [h, n] : seen)
    if (!target.contains(h)) tv += n / samples;
  tv *= 0.5;
  return {actions > 100000 && dk_bad == 0 && rho_bad == 0 && tv <= 0.05,
          fmt("actions=%zu dk_mismatch=%zu rho_err_max=%.1e states=%zu TV=%.4f", actions, dk_bad, worst,
              graphs.size(), tv)};
}

// 7: gradient check over 20 parameter draws.
Outcome gradients(const Context&) {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s)
    worst = std::max(worst, netcheck::five_node_gradient_error(700 + s, Architecture{2, 8, 10.0, 100.0}));
  return {worst <= 1e-3, fmt("max relative error=%.2e over 20 draws", worst)};
}

// 8: exact scaling-fit recovery.
Outcome scaling_fit(const Context&) {
  std::vector<ScalingPoint> pts;
  for (double rho : {-0.4, -0.2, 0.2, 0.4})
    for (double n : {100.0, 400.0, 1600.0}) pts.push_back({rho, n, std::pow(10.0, 1.5 * std::abs(rho)) * std::pow(n, 0.9)});
  const ScalingFit f = fit_scaling(pts);
  return {std::abs(f.alpha - 1.5) < 1e-9 && std::abs(f.beta - 0.9) < 1e-9 && std::abs(f.r_squared - 1.0) < 1e-9,
          fmt("alpha=%.12f beta=%.12f R2=%.12f", f.alpha, f.beta, f.r_squared)};
}

// 9: desk-scale training.
Outcome training(const Context& c) {
  TrainConfig tc;
  tc.arch.hidden = 32;
  tc.domain.families = {Family::ER};
  tc.domain.n_min = tc.domain.n_max = 100;
  tc.domain.k_min = tc.domain.k_max = 6.0;
  tc.domain.rho_min = -0.3;
  tc.domain.rho_max = 0.3;
  tc.domain.rho_abs_min = 0.1;
  tc.domain.epsilon = 0.005;
  tc.total_steps = 2000000;
  tc.stop_success_rate = 0.95;
  tc.threads = c.threads;
  tc.seed = Seed{9};
  tc.out_dir = (c.work / "train").string();
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult tr = train(tc, [t0](const CurveRow& r) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "  train steps=%zu reward=%.2f probe_success=%.2f mean_T=%.1f (%.0fs)\n", r.env_steps,
                 r.mean_reward, r.success_rate, r.mean_t, secs);
  });
  const auto held_out = make_probe_set(tc.domain, 100, Seed{99});
  Actor policy;
  policy.kind = ActorKind::Policy;
  policy.params = &tr.params;
  const ProbeStats ps = evaluate_probes(held_out, policy, 0.005, tc.step_cap_per_edge, Seed{1}, c.threads);
  Actor random;
  random.kind = ActorKind::Random;
  const ProbeStats rs = evaluate_probes(held_out, random, 0.005, tc.step_cap_per_edge, Seed{1}, c.threads);
  return {tr.env_steps <= 2000000 && ps.success_rate >= 0.9,
          fmt("env_steps=%zu held_out_success=%.2f mean_T=%.1f random_success=%.2f random_mean_T=%.1f", tr.env_steps,
              ps.success_rate, ps.mean_t, rs.success_rate, rs.mean_t)};
}

// 10: clustering grows with assortativity.
Outcome clustering_dependence(const Context& c) {
  const Graph base = er(1000, 1001);
  std::vector<double> c0, c6;
  const auto r0 = dmgg_ensemble(base, 0.0, 0.005, 100, Actor{}, 1000 * base.num_edges(), Seed{10}, c.threads);
  const auto r6 = dmgg_ensemble(base, 0.6, 0.005, 100, Actor{}, 1000 * base.num_edges(), Seed{11}, c.threads);
  for (const Graph& g : successes(r0)) c0.push_back(clustering(g));
  for (const Graph& g : successes(r6)) c6.push_back(clustering(g));
  if (c0.size() < 5 || c6.size() < 5) return {false, fmt("too few successes: %zu %zu", c0.size(), c6.size())};
  const double p = significance_test(c0, c6);
  return {c0.size() == 100 && c6.size() == 100 && mean(c6) > mean(c0) && p < 0.01,
          fmt("C(0)=%.5f C(0.6)=%.5f p=%.2e", mean(c0), mean(c6), p)};
}

// 11: flux directionality toward rho*=0.8.
Outcome flux_direction(const Context& c) {
  const Graph base = er(1000, 1101);
  const FluxComparison fc = flux_comparison(base, FluxSettings{}, Actor{}, ErgmSettings{}, Seed{11}, c.threads);
  bool pass = true;
  std::size_t matched = 0;
  std::string detail = fmt("lambda=%.4f window=%zu ", fc.lambda, fc.window);
  for (const FluxLevel& fl : fc.levels) {
    if (!fl.t_dmgg || !fl.t_ergm) {
      detail += fmt("level %.1f unmatched; ", fl.level);
      continue;
    }
    ++matched;
    const double ratio = fl.dmgg.l1_norm() / std::max(fl.ergm.l1_norm(), 1e-300);
    if (!(ratio >= 5.0)) pass = false;
    detail += fmt("level %.1f t=(%zu,%zu) L1=(%.3g,%.3g) ratio=%.1f; ", fl.level, *fl.t_dmgg, *fl.t_ergm,
                  fl.dmgg.l1_norm(), fl.ergm.l1_norm(), ratio);
  }
  return {pass && matched > 0, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"assortgen acceptance run"};
  Context ctx;
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--threads", ctx.threads)->check(CLI::PositiveNumber);
  app.add_option("--work", work);
  app.add_option("--only", only, "criteria to run (default: all)");
  CLI11_PARSE(app, argc, argv);
  ctx.work = work;
  std::filesystem::create_directories(ctx.work);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"hard constraint", hard_constraint},
      {"soft constraint", soft_constraint},
      {"sigma scaling", sigma_scaling},
      {"entropy diversity", entropy},
      {"efficiency", efficiency},
      {"oracle equivalences", oracles},
      {"gradient correctness", gradients},
      {"scaling-fit exactness", scaling_fit},
      {"desk-scale training", training},
      {"clustering dependence", clustering_dependence},
      {"flux directionality", flux_direction}};
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %-22s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
