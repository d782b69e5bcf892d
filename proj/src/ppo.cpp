#include "assortgen/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "assortgen/error.hpp"

namespace assortgen {

double potential(double rho, double rho_target, double zeta) {
  return (std::abs(rho_target) + zeta) / (std::abs(rho_target - rho) + zeta);
}

double reward(double rho_prev, double rho_new, double rho_target, const RewardConfig& cfg, double eps_phys) {
  double r = potential(rho_new, rho_target, cfg.zeta) - potential(rho_prev, rho_target, cfg.zeta) - cfg.step_penalty;
  if (std::abs(rho_new - rho_target) <= eps_phys) r += cfg.success_bonus;
  return r;
}

AdvantageResult gae(std::span<const double> rewards, std::span<const double> values, double bootstrap, double gamma,
                    double lam) {
  if (rewards.size() != values.size()) throw Error(ErrorKind::ShapeMismatch, "rewards and values differ in length");
  const std::size_t n = rewards.size();
  AdvantageResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = bootstrap;
  double acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double delta = rewards[i] + gamma * next_value - values[i];
    acc = delta + gamma * lam * acc;
    out.advantages[i] = acc;
    out.returns[i] = acc + values[i];
    next_value = values[i];
  }
  return out;
}

namespace {

struct StageGrad {
  std::vector<double> d_scores;
  double entropy{0.0};
  double log_prob{0.0};
};

// Log-prob of `chosen` and entropy for one masked softmax stage, plus the
// score gradient of (dlogp * log p(chosen) - ent_coef * H).
StageGrad stage(std::span<const double> scores, std::span<const char> mask, std::size_t chosen, double dlogp,
                double ent_coef) {
  StageGrad out;
  const std::vector<double> lp = masked_log_softmax(scores, mask);
  if (!mask[chosen]) throw Error(ErrorKind::InvalidAction, "stored action is masked");
  out.log_prob = lp[chosen];
  for (std::size_t i = 0; i < lp.size(); ++i) {
    if (mask[i]) out.entropy -= std::exp(lp[i]) * lp[i];
  }
  out.d_scores.assign(scores.size(), 0.0);
  for (std::size_t i = 0; i < lp.size(); ++i) {
    if (!mask[i]) continue;
    const double p = std::exp(lp[i]);
    const double dh = -p * (lp[i] + out.entropy);
    out.d_scores[i] = dlogp * ((i == chosen ? 1.0 : 0.0) - p) - ent_coef * dh;
  }
  return out;
}

struct SampleResult {
  double loss{0.0};
  double policy_loss{0.0};
  double value_loss{0.0};
  double entropy{0.0};
  double kl{0.0};
  bool clipped{false};
};

SampleResult sample_loss(const PolicyParams& params, const Transition& t, double adv, const PPOConfig& cfg,
                         double weight, ParamGrad* grad) {
  PolicyEval heads(params, t.view(), t.sign);
  const auto& a = t.action;
  const Vec& s1v = heads.scores1();
  const std::vector<double> s1(s1v.data(), s1v.data() + s1v.size());
  const Vec& s2v = heads.scores2(a.e1);
  const std::vector<double> s2(s2v.data(), s2v.data() + s2v.size());
  const Eigen::Vector2d sbv = heads.scores_mode(a.e1, a.e2);
  const std::array<double, 2> sb{sbv(0), sbv(1)};

  // First pass for log-prob; the surrogate gradient depends on it.
  const double logp = masked_log_softmax(s1, t.mask1)[a.e1] + masked_log_softmax(s2, t.mask2)[a.e2] +
                      masked_log_softmax(sb, t.mask_b)[static_cast<std::size_t>(a.mode)];
  const double ratio = std::exp(logp - t.log_prob);
  const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
  const double surr1 = ratio * adv;
  const double surr2 = clipped_ratio * adv;
  SampleResult r;
  r.policy_loss = -std::min(surr1, surr2);
  r.clipped = std::abs(ratio - 1.0) > cfg.clip;
  r.kl = t.log_prob - logp;
  const double dlogp = surr1 <= surr2 ? -adv * ratio : 0.0;

  const StageGrad g1 = stage(s1, t.mask1, a.e1, weight * dlogp, weight * cfg.entropy_coef);
  const StageGrad g2 = stage(s2, t.mask2, a.e2, weight * dlogp, weight * cfg.entropy_coef);
  const StageGrad gb =
      stage(sb, t.mask_b, static_cast<std::size_t>(a.mode), weight * dlogp, weight * cfg.entropy_coef);
  r.entropy = g1.entropy + g2.entropy + gb.entropy;

  const ValueEval value(params, t.view(), t.gap);
  const double s = params.arch().value_scale;
  const double verr = (value.value() - t.ret) / s;
  r.value_loss = 0.5 * verr * verr;
  r.loss = r.policy_loss + cfg.value_coef * r.value_loss - cfg.entropy_coef * r.entropy;

  if (grad != nullptr) {
    heads.backward(g1.d_scores, g2.d_scores, gb.d_scores, *grad);
    value.backward(weight * cfg.value_coef * verr / s, *grad);
  }
  return r;
}

}  // namespace

double ppo_loss(const PolicyParams& params, std::span<const Transition* const> batch, const PPOConfig& cfg,
                ParamGrad* grad, PPODiagnostics* diag, std::size_t threads) {
  const std::size_t n = batch.size();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty PPO batch");
  std::vector<double> adv(n);
  for (std::size_t i = 0; i < n; ++i) adv[i] = batch[i]->advantage;
  if (cfg.normalize_advantages && n > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);
  }
  const double weight = 1.0 / static_cast<double>(n);

  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<SampleResult> results(n);
  std::vector<ParamGrad> partial(grad != nullptr ? threads : 0, ParamGrad(params.size(), 0.0));
  auto work = [&](std::size_t w) {
    const std::size_t lo = n * w / threads;
    const std::size_t hi = n * (w + 1) / threads;
    for (std::size_t i = lo; i < hi; ++i) {
      results[i] = sample_loss(params, *batch[i], adv[i], cfg, weight, grad != nullptr ? &partial[w] : nullptr);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  if (grad != nullptr) {
    if (grad->size() != params.size()) grad->assign(params.size(), 0.0);
    for (const ParamGrad& pg : partial) {
      for (std::size_t i = 0; i < pg.size(); ++i) (*grad)[i] += pg[i];
    }
  }

  double loss = 0.0;
  PPODiagnostics d;
  for (const SampleResult& r : results) {
    loss += r.loss;
    d.policy_loss += r.policy_loss;
    d.value_loss += r.value_loss;
    d.entropy += r.entropy;
    d.kl += r.kl;
    d.clip_frac += r.clipped ? 1.0 : 0.0;
  }
  d.policy_loss *= weight;
  d.value_loss *= weight;
  d.entropy *= weight;
  d.kl *= weight;
  d.clip_frac *= weight;
  d.samples = n;
  if (diag != nullptr) *diag = d;
  return loss * weight;
}

PPODiagnostics ppo_update(PolicyParams& params, AdamState& adam, std::span<const Transition> batch,
                          const PPOConfig& cfg, Rng& rng, std::size_t threads) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;
  const std::size_t np = params.size();
  if (adam.m.size() != np) {
    adam.m.assign(np, 0.0);
    adam.v.assign(np, 0.0);
    adam.t = 0;
  }
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t mb = std::max<std::size_t>(1, cfg.minibatch);

  PPODiagnostics total;
  std::size_t count = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t lo = 0; lo < order.size(); lo += mb) {
      const std::size_t hi = std::min(order.size(), lo + mb);
      std::vector<const Transition*> mini;
      for (std::size_t i = lo; i < hi; ++i) mini.push_back(&batch[order[i]]);
      ParamGrad grad(np, 0.0);
      PPODiagnostics d;
      const double loss = ppo_loss(params, mini, cfg, &grad, &d, threads);
      double norm2 = 0.0;
      for (double g : grad) norm2 += g * g;
      if (!std::isfinite(loss) || !std::isfinite(norm2)) {
        throw Error(ErrorKind::NonFinite, "non-finite PPO loss (policy " + std::to_string(d.policy_loss) + ", value " +
                                              std::to_string(d.value_loss) + ", kl " + std::to_string(d.kl) + ")");
      }
      const double norm = std::sqrt(norm2);
      const double scale = (cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm) ? cfg.max_grad_norm / norm : 1.0;
      ++adam.t;
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.t));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.t));
      auto& w = params.data();
      for (std::size_t i = 0; i < np; ++i) {
        const double g = grad[i] * scale;
        adam.m[i] = kBeta1 * adam.m[i] + (1.0 - kBeta1) * g;
        adam.v[i] = kBeta2 * adam.v[i] + (1.0 - kBeta2) * g * g;
        w[i] -= cfg.learning_rate * (adam.m[i] / bc1) / (std::sqrt(adam.v[i] / bc2) + kAdamEps);
      }
      total.policy_loss += d.policy_loss;
      total.value_loss += d.value_loss;
      total.entropy += d.entropy;
      total.kl += d.kl;
      total.clip_frac += d.clip_frac;
      total.samples += d.samples;
      ++count;
    }
  }
  if (count > 0) {
    total.policy_loss /= static_cast<double>(count);
    total.value_loss /= static_cast<double>(count);
    total.entropy /= static_cast<double>(count);
    total.kl /= static_cast<double>(count);
    total.clip_frac /= static_cast<double>(count);
  }
  return total;
}

}  // namespace assortgen
