#pragma once

#include <memory>
#include <optional>

#include "uniac/config.hpp"
#include "uniac/critic.hpp"
#include "uniac/optim.hpp"
#include "uniac/replay.hpp"

namespace uniac {

struct Diagnostics {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double eta = 0.0;
  double entropy = 0.0;
  double kl_mean = 0.0;
  double kl_cov = 0.0;
};

class Learner {
 public:
  virtual ~Learner() = default;
  virtual Diagnostics update(const ReplayBuffer& buffer, Rng& rng) = 0;
  virtual const PolicyNet& policy() const = 0;
  // Env steps between update bursts (AWR trains in whole iterations).
  virtual std::size_t update_interval() const = 0;
};

std::unique_ptr<Learner> make_learner(const AlgorithmConfig& cfg,
                                      std::size_t obs_dim, std::size_t act_dim,
                                      double action_low, double action_high,
                                      Rng init_rng,
                                      const ObsNormalizer* normalizer);

// KL control instantiated as SAC: critic, actor, temperature, target steps.
class SacLearner final : public Learner {
 public:
  SacLearner(const AlgorithmConfig& cfg, std::size_t obs_dim,
             std::size_t act_dim, double lo, double hi, Rng init_rng,
             const ObsNormalizer* normalizer);

  Diagnostics update(const ReplayBuffer& buffer, Rng& rng) override;
  const PolicyNet& policy() const override { return pi_; }
  std::size_t update_interval() const override {
    return cfg_.run.update_interval;
  }

  double eta() const;
  double target_entropy() const { return target_entropy_; }
  const QFunctionPair& critic() const { return q_; }

 private:
  AlgorithmConfig cfg_;
  std::size_t obs_dim_, act_dim_;
  const ObsNormalizer* norm_;
  PolicyNet pi_;
  QFunctionPair q_;
  Tensor log_eta_;
  Optimizer opt_pi_, opt_q_, opt_eta_;
  double target_entropy_ = 0.0;
  std::size_t learn_steps_ = 0;
};

// EM control with Q-family critics: MPO (current-policy prior, trust region,
// temperature dual) and AWAC (replay prior, exp-advantage weights).
class EmLearner final : public Learner {
 public:
  EmLearner(const AlgorithmConfig& cfg, std::size_t obs_dim,
            std::size_t act_dim, double lo, double hi, Rng init_rng,
            const ObsNormalizer* normalizer);

  Diagnostics update(const ReplayBuffer& buffer, Rng& rng) override;
  const PolicyNet& policy() const override { return pi_; }
  std::size_t update_interval() const override {
    return cfg_.run.update_interval;
  }

  double eta() const;
  const TrustRegionState& trust_region() const { return tr_; }

 private:
  AlgorithmConfig cfg_;
  std::size_t obs_dim_, act_dim_;
  const ObsNormalizer* norm_;
  PolicyNet pi_;
  PolicyNet pi_prev_;  // the (k-1)-iterate prior for the E-step
  QFunctionPair q_;
  Tensor log_eta_;
  Optimizer opt_pi_, opt_q_, opt_eta_;
  TrustRegionState tr_;
  double penalty_multiplier_ = 1.0;
  std::size_t learn_steps_ = 0;
};

// EM control in AWR's iteration form: refresh TD(lambda) returns over the
// stored episodes, fit V, then run weighted-likelihood policy epochs.
class AwrLearner final : public Learner {
 public:
  AwrLearner(const AlgorithmConfig& cfg, std::size_t obs_dim,
             std::size_t act_dim, double lo, double hi, Rng init_rng,
             const ObsNormalizer* normalizer);

  Diagnostics update(const ReplayBuffer& buffer, Rng& rng) override;
  const PolicyNet& policy() const override { return pi_; }
  std::size_t update_interval() const override {
    return cfg_.awr.iteration_interval;
  }

  const ValueFunction& value_function() const { return vf_; }

 private:
  AlgorithmConfig cfg_;
  std::size_t obs_dim_, act_dim_;
  const ObsNormalizer* norm_;
  PolicyNet pi_;
  ValueFunction vf_;
  Optimizer opt_pi_, opt_v_;
};

}  // namespace uniac
