#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uniac/nn.hpp"
#include "uniac/normalizer.hpp"
#include "uniac/policy.hpp"

namespace uniac {

// One environment step. terminated = environment hazard (bootstrap
// suppressed); truncated = time-limit cut (bootstrap allowed). Never both.
struct Transition {
  std::vector<double> s;
  std::vector<double> a;
  double r = 0.0;
  std::vector<double> s_next;
  bool terminated = false;
  bool truncated = false;
  std::uint64_t episode_id = 0;
  std::uint32_t step_index = 0;

  void validate() const;
};

// Ordered transitions of one episode segment: s_next of step t equals s of
// step t+1.
struct Trajectory {
  std::vector<Transition> steps;
};

struct ValueFunction {
  Mlp net;

  static ValueFunction init(std::size_t obs_dim,
                            const std::vector<std::size_t>& hidden,
                            Activation activation, bool layer_norm_first,
                            WeightInit weight_init, double output_scale,
                            Rng& rng);

  Tensor forward(const Tensor& states) const;  // [B]
  std::vector<double> values(std::span<const double> obs, std::size_t obs_dim,
                             std::size_t batch) const;  // no tape
};

// Online/target Q networks; the second pair exists only when double_q.
struct QFunctionPair {
  bool double_q = true;
  std::size_t obs_dim = 0, act_dim = 0;
  Mlp q1, q2;
  Mlp target1, target2;

  static QFunctionPair init(std::size_t obs_dim, std::size_t act_dim,
                            const std::vector<std::size_t>& hidden,
                            Activation activation, bool layer_norm_first,
                            WeightInit weight_init, double output_scale,
                            bool double_q, Rng& rng);

  Tensor q1_of(const Tensor& states, const Tensor& actions) const;
  Tensor q2_of(const Tensor& states, const Tensor& actions) const;
  // min over the online pair (degenerates to q1 when single)
  Tensor min_online(const Tensor& states, const Tensor& actions) const;
  // min over the target pair, no tape
  std::vector<double> target_min(std::span<const double> s,
                                 std::span<const double> a,
                                 std::size_t batch) const;

  std::vector<Tensor> online_parameters() const;
  std::vector<std::string> online_parameter_names() const;
  void soft_update_targets(double tau);
  void hard_update_targets();
};

// Elementwise minimum of two equally-long value vectors.
std::vector<double> clipped_min(std::span<const double> q1,
                                std::span<const double> q2);

// Next-action sample (env coordinates, clamped into the box) plus its
// log-density, one per batch row. No tape.
struct SampledActions {
  std::vector<double> actions;
  std::vector<double> log_probs;
};
SampledActions sample_actions_batch(const PolicyNet& policy,
                                    std::span<const double> states,
                                    std::size_t obs_dim, std::size_t batch,
                                    Rng& rng);

// target_i = r_i + gamma * (1 - terminated_i) * minQ_target(s'_i, a'_i) with
// a' drawn from `policy` (n_action_samples per transition, averaged; default
// one). `norm`, when given, standardizes observations before the nets.
std::vector<double> td0_target(std::span<const Transition* const> batch,
                               const QFunctionPair& q, const PolicyNet& policy,
                               double gamma, Rng& rng,
                               const ObsNormalizer* norm = nullptr,
                               std::size_t n_action_samples = 1);

// Soft variant: bootstrap term becomes Q_target - eta * log pi(a'|s').
std::vector<double> soft_td0_target(std::span<const Transition* const> batch,
                                    const QFunctionPair& q,
                                    const PolicyNet& policy, double gamma,
                                    double eta, Rng& rng,
                                    const ObsNormalizer* norm = nullptr,
                                    std::size_t n_action_samples = 1);

// Backward-recursion lambda-returns; V(s_T) bootstraps a truncated tail and
// termination zeroes it.
std::vector<double> td_lambda_returns(const Trajectory& traj,
                                      const ValueFunction& v, double lambda,
                                      double gamma,
                                      const ObsNormalizer* norm = nullptr);

std::vector<double> advantage(std::span<const double> values,
                              std::span<const double> baseline);

// Polyak averaging / verbatim copy of parameters.
void soft_update(Mlp& target, const Mlp& online, double tau);
void hard_update(Mlp& target, const Mlp& online);

}  // namespace uniac
