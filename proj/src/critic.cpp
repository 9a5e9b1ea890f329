#include "uniac/critic.hpp"

#include <algorithm>
#include <cmath>

namespace uniac {

void Transition::validate() const {
  if (terminated && truncated)
    throw ContractViolation("Transition: terminated and truncated both set");
  for (double v : s)
    if (!std::isfinite(v)) throw NonFiniteError("Transition: non-finite s");
  for (double v : a)
    if (!std::isfinite(v)) throw NonFiniteError("Transition: non-finite a");
  for (double v : s_next)
    if (!std::isfinite(v)) throw NonFiniteError("Transition: non-finite s_next");
  if (!std::isfinite(r)) throw NonFiniteError("Transition: non-finite reward");
}

ValueFunction ValueFunction::init(std::size_t obs_dim,
                                  const std::vector<std::size_t>& hidden,
                                  Activation activation, bool layer_norm_first,
                                  WeightInit weight_init, double output_scale,
                                  Rng& rng) {
  MlpSpec spec;
  spec.layer_widths.push_back(obs_dim);
  for (std::size_t h : hidden) spec.layer_widths.push_back(h);
  spec.layer_widths.push_back(1);
  spec.activation = activation;
  spec.layer_norm_first = layer_norm_first;
  spec.weight_init = weight_init;
  spec.output_scale = output_scale;
  ValueFunction v;
  v.net = Mlp::init(spec, rng);
  return v;
}

Tensor ValueFunction::forward(const Tensor& states) const {
  Tensor out = net.forward(states);
  return reshape(out, {out.rows()});
}

std::vector<double> ValueFunction::values(std::span<const double> obs,
                                          std::size_t obs_dim,
                                          std::size_t batch) const {
  NoGradGuard ng;
  Tensor s = Tensor::from({batch, obs_dim}, {obs.begin(), obs.end()});
  Tensor v = forward(s);
  return {v.data().begin(), v.data().end()};
}

QFunctionPair QFunctionPair::init(std::size_t obs_dim, std::size_t act_dim,
                                  const std::vector<std::size_t>& hidden,
                                  Activation activation, bool layer_norm_first,
                                  WeightInit weight_init, double output_scale,
                                  bool double_q, Rng& rng) {
  MlpSpec spec;
  spec.layer_widths.push_back(obs_dim + act_dim);
  for (std::size_t h : hidden) spec.layer_widths.push_back(h);
  spec.layer_widths.push_back(1);
  spec.activation = activation;
  spec.layer_norm_first = layer_norm_first;
  spec.weight_init = weight_init;
  spec.output_scale = output_scale;
  QFunctionPair q;
  q.double_q = double_q;
  q.obs_dim = obs_dim;
  q.act_dim = act_dim;
  q.q1 = Mlp::init(spec, rng);
  q.target1 = Mlp::init(spec, rng);
  q.target1.copy_from(q.q1);
  if (double_q) {
    q.q2 = Mlp::init(spec, rng);
    q.target2 = Mlp::init(spec, rng);
    q.target2.copy_from(q.q2);
  }
  return q;
}

namespace {
Tensor q_eval(const Mlp& net, const Tensor& states, const Tensor& actions) {
  Tensor x = concat_cols(states, actions);
  Tensor out = net.forward(x);
  return reshape(out, {out.rows()});
}
}  // namespace

Tensor QFunctionPair::q1_of(const Tensor& states, const Tensor& actions) const {
  return q_eval(q1, states, actions);
}

Tensor QFunctionPair::q2_of(const Tensor& states, const Tensor& actions) const {
  if (!double_q)
    throw ContractViolation("QFunctionPair: q2 requested in single-Q mode");
  return q_eval(q2, states, actions);
}

Tensor QFunctionPair::min_online(const Tensor& states,
                                 const Tensor& actions) const {
  Tensor a = q_eval(q1, states, actions);
  if (!double_q) return a;
  return min_ew(a, q_eval(q2, states, actions));
}

std::vector<double> QFunctionPair::target_min(std::span<const double> s,
                                              std::span<const double> a,
                                              std::size_t batch) const {
  NoGradGuard ng;
  Tensor st = Tensor::from({batch, obs_dim}, {s.begin(), s.end()});
  Tensor at = Tensor::from({batch, act_dim}, {a.begin(), a.end()});
  Tensor v1 = q_eval(target1, st, at);
  if (!double_q) return {v1.data().begin(), v1.data().end()};
  Tensor v2 = q_eval(target2, st, at);
  return clipped_min(v1.data(), v2.data());
}

std::vector<Tensor> QFunctionPair::online_parameters() const {
  auto out = q1.parameters();
  if (double_q) {
    auto p2 = q2.parameters();
    out.insert(out.end(), p2.begin(), p2.end());
  }
  return out;
}

std::vector<std::string> QFunctionPair::online_parameter_names() const {
  auto out = q1.parameter_names("q1");
  if (double_q) {
    auto p2 = q2.parameter_names("q2");
    out.insert(out.end(), p2.begin(), p2.end());
  }
  return out;
}

void QFunctionPair::soft_update_targets(double tau) {
  soft_update(target1, q1, tau);
  if (double_q) soft_update(target2, q2, tau);
}

void QFunctionPair::hard_update_targets() {
  hard_update(target1, q1);
  if (double_q) hard_update(target2, q2);
}

std::vector<double> clipped_min(std::span<const double> q1,
                                std::span<const double> q2) {
  if (q1.size() != q2.size())
    throw DimensionError("clipped_min: length mismatch " +
                         std::to_string(q1.size()) + " vs " +
                         std::to_string(q2.size()));
  std::vector<double> out(q1.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(q1[i], q2[i]);
  return out;
}

SampledActions sample_actions_batch(const PolicyNet& policy,
                                    std::span<const double> states,
                                    std::size_t obs_dim, std::size_t batch,
                                    Rng& rng) {
  NoGradGuard ng;
  Tensor st = Tensor::from({batch, obs_dim}, {states.begin(), states.end()});
  Tensor noise = Tensor::from({batch, policy.act_dim},
                              rng.normal_vec(batch * policy.act_dim));
  auto rs = policy.rsample(st, noise);
  SampledActions out;
  out.actions.assign(rs.action.data().begin(), rs.action.data().end());
  out.log_probs.assign(rs.log_prob.data().begin(), rs.log_prob.data().end());
  if (!policy.squashed()) {
    for (double& v : out.actions)
      v = std::min(std::max(v, policy.lo), policy.hi);
  }
  return out;
}

namespace {

std::vector<double> td0_impl(std::span<const Transition* const> batch,
                             const QFunctionPair& q, const PolicyNet& policy,
                             double gamma, double eta, Rng& rng,
                             const ObsNormalizer* norm,
                             std::size_t n_samples) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ContractViolation("td0_target: gamma must lie in [0, 1)");
  if (n_samples == 0)
    throw ContractViolation("td0_target: need at least one action sample");
  const std::size_t n = batch.size();
  std::vector<double> next_states;
  next_states.reserve(n * q.obs_dim);
  for (const Transition* t : batch) {
    std::vector<double> s = t->s_next;
    if (norm) norm->apply_in_place(s);
    next_states.insert(next_states.end(), s.begin(), s.end());
  }
  std::vector<double> tail(n, 0.0);
  for (std::size_t k = 0; k < n_samples; ++k) {
    SampledActions next =
        sample_actions_batch(policy, next_states, q.obs_dim, n, rng);
    std::vector<double> boot = q.target_min(next_states, next.actions, n);
    for (std::size_t i = 0; i < n; ++i)
      tail[i] += boot[i] - eta * next.log_probs[i];
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = *batch[i];
    out[i] = t.r + gamma * (t.terminated ? 0.0 : 1.0) *
                       (tail[i] / double(n_samples));
  }
  return out;
}

}  // namespace

std::vector<double> td0_target(std::span<const Transition* const> batch,
                               const QFunctionPair& q, const PolicyNet& policy,
                               double gamma, Rng& rng,
                               const ObsNormalizer* norm,
                               std::size_t n_action_samples) {
  return td0_impl(batch, q, policy, gamma, 0.0, rng, norm, n_action_samples);
}

std::vector<double> soft_td0_target(std::span<const Transition* const> batch,
                                    const QFunctionPair& q,
                                    const PolicyNet& policy, double gamma,
                                    double eta, Rng& rng,
                                    const ObsNormalizer* norm,
                                    std::size_t n_action_samples) {
  return td0_impl(batch, q, policy, gamma, eta, rng, norm, n_action_samples);
}

std::vector<double> td_lambda_returns(const Trajectory& traj,
                                      const ValueFunction& v, double lambda,
                                      double gamma, const ObsNormalizer* norm) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ContractViolation("td_lambda_returns: lambda must lie in [0, 1]");
  const std::size_t n = traj.steps.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  const std::size_t obs_dim = traj.steps[0].s.size();
  std::vector<double> next_obs;
  next_obs.reserve(n * obs_dim);
  for (const Transition& t : traj.steps) {
    std::vector<double> s = t.s_next;
    if (norm) norm->apply_in_place(s);
    next_obs.insert(next_obs.end(), s.begin(), s.end());
  }
  const std::vector<double> vals = v.values(next_obs, obs_dim, n);
  const Transition& last = traj.steps.back();
  double g_next = last.terminated ? 0.0 : vals[n - 1];
  for (std::size_t i = n; i-- > 0;) {
    const Transition& t = traj.steps[i];
    const double bootstrap =
        (i + 1 == n) ? (t.terminated ? 0.0 : vals[i])
                     : ((1.0 - lambda) * vals[i] + lambda * g_next);
    out[i] = t.r + gamma * bootstrap;
    g_next = out[i];
  }
  return out;
}

std::vector<double> advantage(std::span<const double> values,
                              std::span<const double> baseline) {
  if (values.size() != baseline.size())
    throw DimensionError("advantage: length mismatch");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values[i] - baseline[i];
  return out;
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0))
    throw ContractViolation("soft_update: tau must lie in [0, 1]");
  auto dst = target.parameters();
  auto src = online.parameters();
  if (dst.size() != src.size())
    throw DimensionError("soft_update: parameter count mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    auto d = dst[i].mutable_data();
    auto s = src[i].data();
    for (std::size_t j = 0; j < d.size(); ++j)
      d[j] = tau * s[j] + (1.0 - tau) * d[j];
  }
}

void hard_update(Mlp& target, const Mlp& online) { target.copy_from(online); }

}  // namespace uniac
