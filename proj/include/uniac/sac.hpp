#pragma once

#include <span>

#include "uniac/critic.hpp"
#include "uniac/ops.hpp"
#include "uniac/policy.hpp"

namespace uniac {

// KL-solver knobs. eta stays positive because it is optimized as log eta.
struct SacConfig {
  double eta_init = 1.0;
  double eta_lr = 3e-4;
  double target_entropy = 0.0;  // resolved to -act_dim when auto
  bool auto_target_entropy = true;
  bool double_q = true;
  bool soft_q = true;
  double tau = 5e-3;

  void validate() const;
};

// mean over states of [eta * log pi(a|s) - min(Q1,Q2)(s,a)] with a drawn by
// reparameterized sampling; the uniform prior only adds a constant and is
// dropped. out_log_probs (optional) receives the per-state log pi tensor.
Tensor sac_actor_loss(const Tensor& states, const PolicyNet& policy,
                      const QFunctionPair& q, double eta, const Tensor& noise,
                      Tensor* out_log_probs = nullptr);

// Sum over the online pair of MSE against shared constant targets.
Tensor sac_critic_loss(const Tensor& states, const Tensor& actions,
                       const QFunctionPair& q,
                       std::span<const double> targets);

// g(eta) = -eta*target_entropy - eta*mean(log_probs); log_probs are constants.
Tensor temperature_loss(std::span<const double> log_probs,
                        const Tensor& log_eta, double target_entropy);

}  // namespace uniac
