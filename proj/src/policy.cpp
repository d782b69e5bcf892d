#include "assortgen/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace assortgen {

namespace {

struct Admissible {
  bool valid{false};
  bool strict{false};
};

Admissible check_pair(const Graph& g, std::size_t e1, std::size_t e2) {
  Admissible out;
  for (int mode : {0, 1}) {
    const RewiringAction a{e1, e2, mode};
    if (!is_valid(g, a)) continue;
    out.valid = true;
    if (delta_k_unchecked(g, a) != 0) {
      out.strict = true;
      return out;
    }
  }
  return out;
}

// Fills strict/valid flags for every e1. Exact mode scans partners in order
// and stops at the first strict completion.
void scan_first(const Graph& g, const MaskConfig& cfg, Rng& rng, bool exact, std::vector<char>& strict,
                std::vector<char>& valid) {
  const std::size_t m = g.num_edges();
  strict.assign(m, 0);
  valid.assign(m, 0);
  for (std::size_t e1 = 0; e1 < m; ++e1) {
    if (exact) {
      for (std::size_t k = 1; k < m && !strict[e1]; ++k) {
        const Admissible r = check_pair(g, e1, (e1 + k) % m);
        valid[e1] |= r.valid;
        strict[e1] |= r.strict;
      }
    } else {
      for (std::size_t k = 0; k < cfg.probes && !strict[e1]; ++k) {
        std::size_t e2 = uniform_index(rng, m - 1);
        if (e2 >= e1) ++e2;
        const Admissible r = check_pair(g, e1, e2);
        valid[e1] |= r.valid;
        strict[e1] |= r.strict;
      }
    }
  }
}

bool any(const std::vector<char>& v) { return std::find(v.begin(), v.end(), 1) != v.end(); }

}  // namespace

std::size_t StageMask::count() const {
  return static_cast<std::size_t>(std::count(allowed.begin(), allowed.end(), 1));
}

StageMask mask_first(const Graph& g, const MaskConfig& cfg, Rng& rng) {
  if (g.num_edges() < 2) throw Error(ErrorKind::FrozenGraph, "fewer than two edges");
  std::vector<char> strict, valid;
  scan_first(g, cfg, rng, cfg.exact, strict, valid);
  if (!cfg.exact && !any(strict) && !any(valid)) {
    // Probing can miss rare completions; confirm before declaring frozen.
    scan_first(g, cfg, rng, true, strict, valid);
  }
  if (any(strict)) return StageMask{std::move(strict), false};
  if (any(valid)) return StageMask{std::move(valid), true};
  throw Error(ErrorKind::FrozenGraph, "no valid rewiring exists");
}

StageMask mask_second(const Graph& g, std::size_t e1) {
  const std::size_t m = g.num_edges();
  if (e1 >= m) throw Error(ErrorKind::InvalidArgument, "e1 out of range");
  std::vector<char> strict(m, 0), valid(m, 0);
  for (std::size_t e2 = 0; e2 < m; ++e2) {
    if (e2 == e1) continue;
    const Admissible r = check_pair(g, e1, e2);
    valid[e2] = r.valid;
    strict[e2] = r.strict;
  }
  if (any(strict)) return StageMask{std::move(strict), false};
  return StageMask{std::move(valid), true};
}

StageMask mask_mode(const Graph& g, std::size_t e1, std::size_t e2) {
  std::vector<char> strict(2, 0), valid(2, 0);
  for (int mode : {0, 1}) {
    const RewiringAction a{e1, e2, mode};
    if (!is_valid(g, a)) continue;
    valid[mode] = 1;
    strict[mode] = delta_k_unchecked(g, a) != 0;
  }
  if (any(strict)) return StageMask{std::move(strict), false};
  return StageMask{std::move(valid), true};
}

std::vector<double> masked_log_softmax(std::span<const double> scores, std::span<const char> allowed) {
  if (scores.size() != allowed.size()) throw Error(ErrorKind::ShapeMismatch, "scores and mask differ in length");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double mx = kNegInf;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (allowed[i]) mx = std::max(mx, scores[i]);
  }
  if (mx == kNegInf) throw Error(ErrorKind::InvalidAction, "empty action mask");
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (allowed[i]) z += std::exp(scores[i] - mx);
  }
  const double lz = mx + std::log(z);
  std::vector<double> out(scores.size(), kNegInf);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (allowed[i]) out[i] = scores[i] - lz;
  }
  return out;
}

Choice sample_masked(std::span<const double> scores, std::span<const char> allowed, Rng& rng, bool greedy) {
  const std::vector<double> lp = masked_log_softmax(scores, allowed);
  std::size_t pick = scores.size();
  if (greedy) {
    for (std::size_t i = 0; i < lp.size(); ++i) {
      if (allowed[i] && (pick == scores.size() || lp[i] > lp[pick])) pick = i;
    }
  } else {
    double u = uniform01(rng);
    for (std::size_t i = 0; i < lp.size(); ++i) {
      if (!allowed[i]) continue;
      pick = i;
      u -= std::exp(lp[i]);
      if (u < 0.0) break;
    }
  }
  return Choice{pick, lp[pick]};
}

SampledAction sample_action(PolicyEval& heads, const Graph& g, const MaskConfig& cfg, Rng& rng, bool greedy) {
  SampledAction out;
  out.mask1 = mask_first(g, cfg, rng);
  const Vec& s1 = heads.scores1();
  const Choice c1 = sample_masked(std::span<const double>(s1.data(), s1.size()), out.mask1.allowed, rng, greedy);
  out.mask2 = mask_second(g, c1.index);
  const Vec& s2 = heads.scores2(c1.index);
  const Choice c2 = sample_masked(std::span<const double>(s2.data(), s2.size()), out.mask2.allowed, rng, greedy);
  out.mask_b = mask_mode(g, c1.index, c2.index);
  const Eigen::Vector2d& sb = heads.scores_mode(c1.index, c2.index);
  const Choice cb = sample_masked(std::span<const double>(sb.data(), 2), out.mask_b.allowed, rng, greedy);
  out.action = RewiringAction{c1.index, c2.index, static_cast<int>(cb.index)};
  out.log_prob = c1.log_prob + c2.log_prob + cb.log_prob;
  return out;
}

SampledAction policy_act(const PolicyParams& params, const Graph& g, int sign, const MaskConfig& cfg, Rng& rng,
                         bool greedy) {
  PolicyEval heads(params, GraphView::of(g), sign);
  return sample_action(heads, g, cfg, rng, greedy);
}

double epsilon_phys(double epsilon, std::size_t num_edges, double var_k) {
  if (num_edges == 0) throw Error(ErrorKind::InvalidArgument, "epsilon_phys with E = 0");
  if (!(var_k > 0.0)) throw Error(ErrorKind::Degenerate, "epsilon_phys with zero degree variance");
  return std::max(epsilon, 2.0 / (static_cast<double>(num_edges) * var_k));
}

RewiringAction random_valid_action(const Graph& g, Rng& rng) {
  if (g.num_edges() < 2) throw Error(ErrorKind::FrozenGraph, "fewer than two edges");
  for (std::size_t tries = 0; tries < 1000 * g.num_edges() + 1000; ++tries) {
    const RewiringAction a = random_action(g, rng);
    if (is_valid(g, a)) return a;
  }
  throw Error(ErrorKind::FrozenGraph, "no valid rewiring found");
}

RewiringAction greedy_step(const Graph& g, double rho, double rho_target, std::size_t pool_size, Rng& rng) {
  const double sign = rho_target > rho ? 1.0 : (rho_target < rho ? -1.0 : 0.0);
  RewiringAction best = random_valid_action(g, rng);
  double best_score = sign * static_cast<double>(delta_k_unchecked(g, best));
  for (std::size_t i = 1; i < pool_size; ++i) {
    const RewiringAction a = random_valid_action(g, rng);
    const double score = sign * static_cast<double>(delta_k_unchecked(g, a));
    if (score > best_score) {
      best = a;
      best_score = score;
    }
  }
  return best;
}

void RewardConfig::validate() const {
  if (!(zeta > 0.0) || !(step_penalty >= 0.0) || !(success_bonus >= 1.0) || !(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "reward parameters out of range");
  }
}

void EpisodeConfig::validate() const {
  if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  if (!(rho_target >= -1.0 && rho_target <= 1.0)) throw Error(ErrorKind::InvalidArgument, "target outside [-1, 1]");
  reward.validate();
}

}  // namespace assortgen
