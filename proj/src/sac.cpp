#include "uniac/sac.hpp"

#include <cmath>

#include "uniac/learners.hpp"

namespace uniac {

void SacConfig::validate() const {
  if (!(eta_init > 0.0)) throw ContractViolation("SacConfig: eta must be > 0");
  if (!(tau > 0.0 && tau <= 1.0))
    throw ContractViolation("SacConfig: tau must lie in (0, 1]");
}

Tensor sac_actor_loss(const Tensor& states, const PolicyNet& policy,
                      const QFunctionPair& q, double eta, const Tensor& noise,
                      Tensor* out_log_probs) {
  auto rs = policy.rsample(states, noise);
  Tensor qmin = q.min_online(states, rs.action);
  if (out_log_probs) *out_log_probs = rs.log_prob;
  return mean(sub(scale(rs.log_prob, eta), qmin));
}

Tensor sac_critic_loss(const Tensor& states, const Tensor& actions,
                       const QFunctionPair& q,
                       std::span<const double> targets) {
  if (targets.size() != states.rows())
    throw DimensionError("sac_critic_loss: " + std::to_string(targets.size()) +
                         " targets for batch " + std::to_string(states.rows()));
  Tensor y = Tensor::from({targets.size()}, {targets.begin(), targets.end()});
  Tensor loss = mean(square(sub(q.q1_of(states, actions), y)));
  if (q.double_q)
    loss = add(loss, mean(square(sub(q.q2_of(states, actions), y))));
  return loss;
}

Tensor temperature_loss(std::span<const double> log_probs,
                        const Tensor& log_eta, double target_entropy) {
  double mean_lp = 0.0;
  for (double v : log_probs) mean_lp += v;
  mean_lp /= double(log_probs.size());
  Tensor eta = exp_t(log_eta);
  return neg(scale(eta, target_entropy + mean_lp));
}

namespace {

// Gathers normalized states and raw actions of a batch into [B, .] tensors.
void batch_arrays(std::span<const Transition* const> batch,
                  const ObsNormalizer* norm, std::size_t obs_dim,
                  std::size_t act_dim, Tensor* states, Tensor* actions) {
  std::vector<double> s, a;
  s.reserve(batch.size() * obs_dim);
  a.reserve(batch.size() * act_dim);
  for (const Transition* t : batch) {
    std::vector<double> o = t->s;
    if (norm) norm->apply_in_place(o);
    s.insert(s.end(), o.begin(), o.end());
    a.insert(a.end(), t->a.begin(), t->a.end());
  }
  *states = Tensor::from({batch.size(), obs_dim}, std::move(s));
  *actions = Tensor::from({batch.size(), act_dim}, std::move(a));
}

}  // namespace

SacLearner::SacLearner(const AlgorithmConfig& cfg, std::size_t obs_dim,
                       std::size_t act_dim, double lo, double hi, Rng init_rng,
                       const ObsNormalizer* normalizer)
    : cfg_(cfg), obs_dim_(obs_dim), act_dim_(act_dim), norm_(normalizer),
      pi_(), q_(), log_eta_(Tensor::scalar(std::log(cfg.sac.eta_init), true)),
      opt_pi_(Optimizer::adam(cfg.policy_lr, {}, {})),
      opt_q_(Optimizer::adam(cfg.value_lr, {}, {})),
      opt_eta_(Optimizer::adam(cfg.sac.eta_lr, {log_eta_}, {"log_eta"})) {
  Rng pi_rng = init_rng.derive("policy");
  Rng q_rng = init_rng.derive("critic");
  pi_ = PolicyNet::init(cfg.policy_head, obs_dim, act_dim, cfg.policy_widths(),
                        cfg.activation, cfg.layer_norm, cfg.weight_init,
                        cfg.output_scale_policy, cfg.init_stddev_scale, lo, hi,
                        pi_rng);
  pi_.clip_eps = cfg.clip_eps;
  pi_.log_std_min = cfg.log_std_min;
  pi_.log_std_max = cfg.log_std_max;
  q_ = QFunctionPair::init(obs_dim, act_dim, cfg.value_widths(), cfg.activation,
                           cfg.layer_norm, cfg.weight_init,
                           cfg.output_scale_value, cfg.double_q(), q_rng);
  opt_pi_ = cfg.optimizer == OptimizerKind::Adam
                ? Optimizer::adam(cfg.policy_lr, pi_.parameters(),
                                  pi_.parameter_names("pi"))
                : Optimizer::sgd_momentum(cfg.policy_lr, pi_.parameters(),
                                          pi_.parameter_names("pi"),
                                          cfg.momentum);
  opt_q_ = cfg.optimizer == OptimizerKind::Adam
               ? Optimizer::adam(cfg.value_lr, q_.online_parameters(),
                                 q_.online_parameter_names())
               : Optimizer::sgd_momentum(cfg.value_lr, q_.online_parameters(),
                                         q_.online_parameter_names(),
                                         cfg.momentum);
  target_entropy_ = cfg.sac.auto_target_entropy ? -double(act_dim)
                                                : cfg.sac.target_entropy;
}

double SacLearner::eta() const { return std::exp(log_eta_.data()[0]); }

Diagnostics SacLearner::update(const ReplayBuffer& buffer, Rng& rng) {
  const std::size_t b = cfg_.run.batch_size;
  auto batch = buffer.sample(b, rng);

  Tensor states, actions;
  batch_arrays(batch, norm_, obs_dim_, act_dim_, &states, &actions);
  const bool soft = cfg_.g_choice == GChoice::SoftQ;
  const std::vector<double> targets =
      soft ? soft_td0_target(batch, q_, pi_, cfg_.gamma, eta(), rng, norm_)
           : td0_target(batch, q_, pi_, cfg_.gamma, rng, norm_);

  opt_q_.zero_grad();
  Tensor critic_loss = sac_critic_loss(states, actions, q_, targets);
  backward(critic_loss);
  opt_q_.step();

  opt_pi_.zero_grad();
  Tensor noise = Tensor::from({b, act_dim_}, rng.normal_vec(b * act_dim_));
  Tensor log_probs;
  Tensor actor_loss =
      sac_actor_loss(states, pi_, q_, eta(), noise, &log_probs);
  backward(actor_loss);
  opt_pi_.step();

  opt_eta_.zero_grad();
  Tensor eta_loss =
      temperature_loss(log_probs.data(), log_eta_, target_entropy_);
  backward(eta_loss);
  opt_eta_.step();

  ++learn_steps_;
  if (cfg_.target_mode == TargetMode::Soft) {
    q_.soft_update_targets(cfg_.tau);
  } else if (cfg_.target_mode == TargetMode::Hard &&
             learn_steps_ % cfg_.hard_update_interval == 0) {
    q_.hard_update_targets();
  }

  Diagnostics d;
  d.actor_loss = actor_loss.item();
  d.critic_loss = critic_loss.item();
  d.eta = eta();
  double mean_lp = 0.0;
  for (double v : log_probs.data()) mean_lp += v;
  d.entropy = -mean_lp / double(b);
  return d;
}

}  // namespace uniac
