#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "assortgen/network.hpp"
#include "assortgen/policy.hpp"

namespace assortgen {

/// Shaping potential (|rho*| + zeta) / (|rho* - rho| + zeta).
double potential(double rho, double rho_target, double zeta);

/// phi(rho_new) - phi(rho_prev) - p + s * 1[|rho_new - rho*| <= eps_phys].
double reward(double rho_prev, double rho_new, double rho_target, const RewardConfig& cfg, double eps_phys);

struct AdvantageResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

/// Generalized advantage estimation over one trajectory segment. Throws
/// ShapeMismatch if the lengths differ.
AdvantageResult gae(std::span<const double> rewards, std::span<const double> values, double bootstrap, double gamma,
                    double lam);

/// One stored environment step. The edge snapshot keeps slot order so the
/// stored action indices stay meaningful.
struct Transition {
  std::size_t num_nodes{0};
  std::vector<Edge> edges;
  std::vector<int> degrees;
  int max_degree{0};
  int sign{1};
  double gap{0.0};
  RewiringAction action;
  std::vector<char> mask1, mask2;
  std::array<char, 2> mask_b{0, 0};
  double log_prob{0.0};
  double value{0.0};
  double reward{0.0};
  double advantage{0.0};
  double ret{0.0};

  GraphView view() const {
    return GraphView{num_nodes, std::span<const Edge>(edges), std::span<const int>(degrees), max_degree};
  }
};

struct PPOConfig {
  double clip{0.2};
  double learning_rate{3e-4};
  std::size_t epochs{4};
  std::size_t minibatch{256};
  double gae_lambda{0.95};
  double entropy_coef{0.01};
  double value_coef{0.5};
  double max_grad_norm{0.5};
  bool normalize_advantages{true};
};

struct PPODiagnostics {
  double policy_loss{0.0};
  double value_loss{0.0};
  double entropy{0.0};
  double kl{0.0};         // mean (old log prob - new log prob)
  double clip_frac{0.0};  // fraction of samples with a clipped ratio
  std::size_t samples{0};
};

/// Minibatch loss: clipped surrogate + value_coef * 0.5 ((V - R) / S)^2 -
/// entropy_coef * H, averaged over the batch (S = value_scale). If grad is
/// non-null the exact gradient is accumulated into it.
double ppo_loss(const PolicyParams& params, std::span<const Transition* const> batch, const PPOConfig& cfg,
                ParamGrad* grad, PPODiagnostics* diag = nullptr, std::size_t threads = 1);

struct AdamState {
  std::vector<double> m, v;
  std::size_t t{0};
};

/// Epochs of shuffled minibatch Adam steps on the clipped objective.
/// Throws NonFinite on a non-finite loss or gradient.
PPODiagnostics ppo_update(PolicyParams& params, AdamState& adam, std::span<const Transition> batch,
                          const PPOConfig& cfg, Rng& rng, std::size_t threads = 1);

}  // namespace assortgen
