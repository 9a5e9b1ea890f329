#include "uniac/em.hpp"

#include <algorithm>
#include <cmath>

#include "uniac/learners.hpp"

namespace uniac {

void EmConfig::validate() const {
  if (!(eta_init > 0.0)) throw ContractViolation("EmConfig: eta must be > 0");
  if (!(dual_constraint > 0.0))
    throw ContractViolation("EmConfig: dual constraint must be > 0");
  if (!(mean_constraint > 0.0) || !(stddev_constraint > 0.0))
    throw ContractViolation("EmConfig: trust-region constraints must be > 0");
  if (z_mode == ZMode::SampleMeanZ && e_step_action_samples < 2)
    throw ContractViolation("EmConfig: SAMPLE_MEAN_Z needs at least 2 samples");
}

std::vector<double> e_step_weights(std::span<const double> g,
                                   std::size_t n_states, std::size_t m,
                                   double eta, ZMode mode, double weight_clip) {
  if (!(eta > 0.0)) throw ContractViolation("e_step_weights: eta must be > 0");
  if (g.size() != n_states * m)
    throw DimensionError("e_step_weights: expected " +
                         std::to_string(n_states * m) + " scores, got " +
                         std::to_string(g.size()));
  std::vector<double> w(g.size());
  if (mode == ZMode::SampleMeanZ) {
    for (std::size_t s = 0; s < n_states; ++s) {
      const double* row = g.data() + s * m;
      double mx = row[0];
      for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
      double z = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        w[s * m + j] = std::exp((row[j] - mx) / eta);
        z += w[s * m + j];
      }
      for (std::size_t j = 0; j < m; ++j) w[s * m + j] /= z;
    }
  } else {
    const double log_clip =
        weight_clip > 0.0 ? std::log(weight_clip) : 1e300;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double e = g[i] / eta;
      w[i] = e >= log_clip ? weight_clip : std::exp(e);
    }
  }
  return w;
}

double e_step_weight_kl(std::span<const double> weights, std::size_t n_states,
                        std::size_t m) {
  double acc = 0.0;
  for (std::size_t s = 0; s < n_states; ++s) {
    double kl = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double w = weights[s * m + j];
      if (w > 0.0) kl += w * std::log(double(m) * w);
    }
    acc += kl;
  }
  return acc / double(n_states);
}

Tensor dual_eta_loss(std::span<const double> g, const Tensor& log_eta,
                     double eps) {
  if (g.empty()) throw ContractViolation("dual_eta_loss: empty score batch");
  double mx = g[0];
  for (double v : g) mx = std::max(mx, v);
  Tensor shifted = Tensor::from({g.size()}, [&] {
    std::vector<double> out(g.begin(), g.end());
    for (double& v : out) v -= mx;
    return out;
  }());
  Tensor eta = exp_t(log_eta);
  Tensor inv_eta = exp_t(neg(log_eta));
  // eta*eps + mx + eta * log mean exp((g - mx)/eta)
  Tensor lse = log_t(mean(exp_t(mul_scalar_t(shifted, inv_eta))));
  return add_scalar(add(scale(eta, eps), mul(eta, lse)), mx);
}

Tensor m_step_loss(const Tensor& log_probs, std::span<const double> weights,
                   std::size_t n_states, const Tensor& penalty) {
  if (log_probs.numel() != weights.size())
    throw DimensionError("m_step_loss: " + std::to_string(weights.size()) +
                         " weights for " + std::to_string(log_probs.numel()) +
                         " log-probs");
  Tensor w = Tensor::from(log_probs.shape(), {weights.begin(), weights.end()});
  Tensor loss = scale(sum(mul(log_probs, w)), -1.0 / double(n_states));
  if (penalty.defined()) loss = add(loss, penalty);
  return loss;
}

Tensor trust_region_m_step(const Tensor& m_loss, const Tensor& kl_mean_batch,
                           const Tensor& kl_cov_batch,
                           const TrustRegionState& tr, double eps_mean,
                           double eps_cov) {
  Tensor term_mean = scale(add_scalar(mean(kl_mean_batch), -eps_mean), tr.alpha_mean);
  Tensor term_cov = scale(add_scalar(mean(kl_cov_batch), -eps_cov), tr.alpha_cov);
  return add(m_loss, add(term_mean, term_cov));
}

void trust_region_dual_ascent(TrustRegionState& tr, double kl_mean_hat,
                              double kl_cov_hat, double eps_mean,
                              double eps_cov, double lr) {
  tr.alpha_mean = std::max(0.0, tr.alpha_mean + lr * (kl_mean_hat - eps_mean));
  tr.alpha_cov = std::max(0.0, tr.alpha_cov + lr * (kl_cov_hat - eps_cov));
}

namespace {

std::vector<double> normalized_states_flat(
    std::span<const Transition* const> batch, const ObsNormalizer* norm) {
  std::vector<double> s;
  if (batch.empty()) return s;
  s.reserve(batch.size() * batch[0]->s.size());
  for (const Transition* t : batch) {
    std::vector<double> o = t->s;
    if (norm) norm->apply_in_place(o);
    s.insert(s.end(), o.begin(), o.end());
  }
  return s;
}

Optimizer make_optimizer(const AlgorithmConfig& cfg, double lr,
                         std::vector<Tensor> params,
                         std::vector<std::string> names) {
  if (cfg.optimizer == OptimizerKind::Adam)
    return Optimizer::adam(lr, std::move(params), std::move(names));
  return Optimizer::sgd_momentum(lr, std::move(params), std::move(names),
                                 cfg.momentum);
}

PolicyNet make_policy(const AlgorithmConfig& cfg, std::size_t obs_dim,
                      std::size_t act_dim, double lo, double hi, Rng& rng) {
  PolicyNet p = PolicyNet::init(
      cfg.policy_head, obs_dim, act_dim, cfg.policy_widths(), cfg.activation,
      cfg.layer_norm, cfg.weight_init, cfg.output_scale_policy,
      cfg.init_stddev_scale, lo, hi, rng);
  p.clip_eps = cfg.clip_eps;
  p.log_std_min = cfg.log_std_min;
  p.log_std_max = cfg.log_std_max;
  return p;
}

}  // namespace

EmLearner::EmLearner(const AlgorithmConfig& cfg, std::size_t obs_dim,
                     std::size_t act_dim, double lo, double hi, Rng init_rng,
                     const ObsNormalizer* normalizer)
    : cfg_(cfg), obs_dim_(obs_dim), act_dim_(act_dim), norm_(normalizer),
      log_eta_(Tensor::scalar(std::log(cfg.em.eta_init), true)),
      opt_pi_(Optimizer::adam(0.0, {}, {})),
      opt_q_(Optimizer::adam(0.0, {}, {})),
      opt_eta_(Optimizer::adam(cfg.em.eta_lr, {log_eta_}, {"log_eta"})) {
  Rng pi_rng = init_rng.derive("policy");
  Rng q_rng = init_rng.derive("critic");
  pi_ = make_policy(cfg, obs_dim, act_dim, lo, hi, pi_rng);
  Rng prev_rng = init_rng.derive("policy_prev");
  pi_prev_ = make_policy(cfg, obs_dim, act_dim, lo, hi, prev_rng);
  pi_prev_.copy_from(pi_);
  q_ = QFunctionPair::init(obs_dim, act_dim, cfg.value_widths(), cfg.activation,
                           cfg.layer_norm, cfg.weight_init,
                           cfg.output_scale_value, cfg.double_q(), q_rng);
  opt_pi_ = make_optimizer(cfg, cfg.policy_lr, pi_.parameters(),
                           pi_.parameter_names("pi"));
  opt_q_ = make_optimizer(cfg, cfg.value_lr, q_.online_parameters(),
                          q_.online_parameter_names());
}

double EmLearner::eta() const { return std::exp(log_eta_.data()[0]); }

Diagnostics EmLearner::update(const ReplayBuffer& buffer, Rng& rng) {
  const std::size_t b = cfg_.run.batch_size;
  auto batch = buffer.sample(b, rng);
  const std::vector<double> states_flat = normalized_states_flat(batch, norm_);
  Tensor states = Tensor::from({b, obs_dim_}, states_flat);

  // critic regression toward constant targets
  const bool soft = cfg_.g_choice == GChoice::SoftQ;
  const std::vector<double> targets =
      soft ? soft_td0_target(batch, q_, pi_, cfg_.gamma, cfg_.em.soft_q_eta,
                             rng, norm_)
           : td0_target(batch, q_, pi_, cfg_.gamma, rng, norm_);
  std::vector<double> acts_flat;
  acts_flat.reserve(b * act_dim_);
  for (const Transition* t : batch)
    acts_flat.insert(acts_flat.end(), t->a.begin(), t->a.end());
  Tensor actions = Tensor::from({b, act_dim_}, acts_flat);
  Tensor y = Tensor::from({b}, targets);
  opt_q_.zero_grad();
  Tensor critic_loss = mean(square(sub(q_.q1_of(states, actions), y)));
  if (q_.double_q)
    critic_loss = add(critic_loss, mean(square(sub(q_.q2_of(states, actions), y))));
  backward(critic_loss);
  opt_q_.step();

  // E-step: score prior actions with the target critic
  const bool replay_prior = cfg_.em.prior_source == PriorSource::ReplayMixture;
  const std::size_t m = replay_prior ? 1 : cfg_.em.e_step_action_samples;
  std::vector<double> e_states = states_flat;
  std::vector<double> e_actions;
  std::vector<double> g;
  if (replay_prior) {
    e_actions = acts_flat;
    g = q_.target_min(states_flat, acts_flat, b);
    // advantage baseline: policy expectation of Q via sampled actions
    std::vector<double> baseline(b, 0.0);
    const std::size_t k = std::max<std::size_t>(1, cfg_.em.v_baseline_samples);
    for (std::size_t j = 0; j < k; ++j) {
      SampledActions sa =
          sample_actions_batch(pi_, states_flat, obs_dim_, b, rng);
      std::vector<double> qv = q_.target_min(states_flat, sa.actions, b);
      for (std::size_t i = 0; i < b; ++i) baseline[i] += qv[i] / double(k);
    }
    for (std::size_t i = 0; i < b; ++i) g[i] -= baseline[i];
  } else {
    // tile states, sample M actions per state from the previous iterate
    e_states.clear();
    e_states.reserve(b * m * obs_dim_);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < m; ++j)
        e_states.insert(e_states.end(), states_flat.begin() + i * obs_dim_,
                        states_flat.begin() + (i + 1) * obs_dim_);
    NoGradGuard ng;
    Tensor es = Tensor::from({b * m, obs_dim_}, e_states);
    Tensor noise =
        Tensor::from({b * m, act_dim_}, rng.normal_vec(b * m * act_dim_));
    auto rs = pi_prev_.rsample(es, noise);
    e_actions.assign(rs.action.data().begin(), rs.action.data().end());
    g = q_.target_min(e_states, e_actions, b * m);
  }

  // temperature dual (one alternating step), then weights at the new eta
  if (cfg_.em.learn_eta) {
    opt_eta_.zero_grad();
    Tensor dual = dual_eta_loss(g, log_eta_, cfg_.em.dual_constraint);
    backward(dual);
    opt_eta_.step();
  }
  std::vector<double> g_for_weights = g;
  if (cfg_.em.standardize_advantages) {
    double mu = 0.0, var = 0.0;
    for (double v : g) mu += v;
    mu /= double(g.size());
    for (double v : g) var += (v - mu) * (v - mu);
    var /= double(g.size());
    const double sd = std::sqrt(std::max(var, 1e-12));
    for (double& v : g_for_weights) v = (v - mu) / sd;
  }
  const std::vector<double> w = e_step_weights(
      g_for_weights, b, m, eta(), cfg_.em.z_mode, cfg_.em.weight_clip);

  // M-step
  Tensor es = Tensor::from({b * m, obs_dim_}, e_states);
  GaussianDist dcur = pi_.dist(es);
  Tensor lp;
  if (pi_.squashed()) {
    lp = tanh_log_prob_of(dcur, e_actions, pi_.lo, pi_.hi, pi_.clip_eps);
  } else {
    Tensor ea = Tensor::from({b * m, act_dim_}, e_actions);
    lp = gaussian_log_prob(dcur, ea);
  }
  Tensor penalty;
  double penalty_excess = 0.0;
  if (cfg_.out_of_bounds == OutOfBounds::ActionPenalty) {
    const double coeff = cfg_.penalty_mode == PenaltyMode::FixedCoefficient
                             ? cfg_.action_penalty_coeff
                             : penalty_multiplier_;
    Tensor excess = action_penalty(dcur.mean, pi_.hi, 1.0);
    penalty_excess = mean(excess.detach()).item();
    penalty = scale(mean(excess), coeff);
  }
  Tensor m_loss = m_step_loss(reshape(lp, {b, m}), w, b, penalty);
  Tensor total = m_loss;
  Tensor klm, klc;
  if (cfg_.em.m_step == MStepMode::SgPlusTrustRegion) {
    GaussianDist dprev;
    {
      NoGradGuard ng;
      dprev = pi_prev_.dist(es);
    }
    auto kl = gaussian_kl_decomposed(dprev, dcur);
    klm = kl.first;
    klc = kl.second;
    const double dim_scale =
        cfg_.em.constraints_per_action_dim ? double(act_dim_) : 1.0;
    const double eps_m = cfg_.em.mean_constraint / dim_scale;
    const double eps_c = cfg_.em.stddev_constraint / dim_scale;
    total = trust_region_m_step(m_loss, klm, klc, tr_, eps_m, eps_c);
    opt_pi_.zero_grad();
    backward(total);
    opt_pi_.step();
    trust_region_dual_ascent(tr_, mean(klm.detach()).item(),
                             mean(klc.detach()).item(), eps_m, eps_c,
                             cfg_.em.multiplier_lr);
  } else {
    opt_pi_.zero_grad();
    backward(total);
    opt_pi_.step();
  }
  if (cfg_.out_of_bounds == OutOfBounds::ActionPenalty &&
      cfg_.penalty_mode == PenaltyMode::DualVariable) {
    penalty_multiplier_ = std::max(
        0.0, penalty_multiplier_ +
                 cfg_.penalty_multiplier_lr *
                     (penalty_excess - cfg_.action_penalty_constraint));
  }

  ++learn_steps_;
  if (cfg_.target_mode == TargetMode::Hard &&
      learn_steps_ % cfg_.hard_update_interval == 0) {
    q_.hard_update_targets();
    pi_prev_.copy_from(pi_);
  } else if (cfg_.target_mode == TargetMode::Soft) {
    q_.soft_update_targets(cfg_.tau);
    soft_update(pi_prev_.net, pi_.net, cfg_.tau);
  }

  Diagnostics d;
  d.actor_loss = total.item();
  d.critic_loss = critic_loss.item();
  d.eta = eta();
  if (pi_.squashed()) {
    double mean_lp = 0.0;
    for (double v : lp.data()) mean_lp += v;
    d.entropy = -mean_lp / double(lp.numel());
  } else {
    d.entropy = mean(gaussian_entropy(dcur).detach()).item();
  }
  if (klm.defined()) {
    d.kl_mean = mean(klm.detach()).item();
    d.kl_cov = mean(klc.detach()).item();
  }
  return d;
}

AwrLearner::AwrLearner(const AlgorithmConfig& cfg, std::size_t obs_dim,
                       std::size_t act_dim, double lo, double hi, Rng init_rng,
                       const ObsNormalizer* normalizer)
    : cfg_(cfg), obs_dim_(obs_dim), act_dim_(act_dim), norm_(normalizer),
      opt_pi_(Optimizer::adam(0.0, {}, {})),
      opt_v_(Optimizer::adam(0.0, {}, {})) {
  Rng pi_rng = init_rng.derive("policy");
  Rng v_rng = init_rng.derive("value");
  pi_ = make_policy(cfg, obs_dim, act_dim, lo, hi, pi_rng);
  vf_ = ValueFunction::init(obs_dim, cfg.value_widths(), cfg.activation,
                            cfg.layer_norm, cfg.weight_init,
                            cfg.output_scale_value, v_rng);
  opt_pi_ = make_optimizer(cfg, cfg.policy_lr, pi_.parameters(),
                           pi_.parameter_names("pi"));
  opt_v_ = make_optimizer(cfg, cfg.value_lr, vf_.net.parameters(),
                          vf_.net.parameter_names("v"));
}

Diagnostics AwrLearner::update(const ReplayBuffer& buffer, Rng& rng) {
  // refresh lambda-returns over every stored segment with the current V
  std::vector<double> all_s, all_a, all_g;
  for (const auto& seg : buffer.episode_segments()) {
    Trajectory traj = buffer.segment_trajectory(seg);
    const std::vector<double> returns =
        td_lambda_returns(traj, vf_, cfg_.td_lambda, cfg_.gamma, norm_);
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      std::vector<double> o = traj.steps[i].s;
      if (norm_) norm_->apply_in_place(o);
      all_s.insert(all_s.end(), o.begin(), o.end());
      all_a.insert(all_a.end(), traj.steps[i].a.begin(), traj.steps[i].a.end());
      all_g.push_back(returns[i]);
    }
  }
  const std::size_t n = all_g.size();
  if (n == 0) return {};
  const std::size_t b = std::min(cfg_.run.batch_size, n);

  double critic_loss = 0.0;
  for (std::size_t step = 0; step < cfg_.awr.value_steps; ++step) {
    std::vector<double> sb, gb;
    sb.reserve(b * obs_dim_);
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t k = rng.uniform_index(n);
      sb.insert(sb.end(), all_s.begin() + k * obs_dim_,
                all_s.begin() + (k + 1) * obs_dim_);
      gb.push_back(all_g[k]);
    }
    opt_v_.zero_grad();
    Tensor loss = mean(square(sub(vf_.forward(Tensor::from({b, obs_dim_}, sb)),
                                  Tensor::from({b}, gb))));
    backward(loss);
    opt_v_.step();
    critic_loss = loss.item();
  }

  // advantages against the freshly fitted baseline
  const std::vector<double> baseline = vf_.values(all_s, obs_dim_, n);
  double actor_loss = 0.0, entropy = 0.0;
  for (std::size_t step = 0; step < cfg_.awr.policy_steps; ++step) {
    std::vector<double> sb, ab, adv;
    sb.reserve(b * obs_dim_);
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t k = rng.uniform_index(n);
      sb.insert(sb.end(), all_s.begin() + k * obs_dim_,
                all_s.begin() + (k + 1) * obs_dim_);
      ab.insert(ab.end(), all_a.begin() + k * act_dim_,
                all_a.begin() + (k + 1) * act_dim_);
      adv.push_back(all_g[k] - baseline[k]);
    }
    if (cfg_.em.standardize_advantages) {
      double mu = 0.0, var = 0.0;
      for (double v : adv) mu += v;
      mu /= double(b);
      for (double v : adv) var += (v - mu) * (v - mu);
      var /= double(b);
      const double sd = std::sqrt(std::max(var, 1e-12));
      for (double& v : adv) v = (v - mu) / sd;
    }
    const std::vector<double> w = e_step_weights(
        adv, b, 1, cfg_.em.eta_init, cfg_.em.z_mode, cfg_.em.weight_clip);
    Tensor states = Tensor::from({b, obs_dim_}, sb);
    GaussianDist d = pi_.dist(states);
    Tensor lp;
    if (pi_.squashed()) {
      lp = tanh_log_prob_of(d, ab, pi_.lo, pi_.hi, pi_.clip_eps);
    } else {
      lp = gaussian_log_prob(d, Tensor::from({b, act_dim_}, ab));
    }
    Tensor penalty;
    if (cfg_.out_of_bounds == OutOfBounds::ActionPenalty)
      penalty = scale(mean(action_penalty(d.mean, pi_.hi, 1.0)),
                      cfg_.action_penalty_coeff);
    Tensor loss = m_step_loss(reshape(lp, {b, 1}), w, b, penalty);
    opt_pi_.zero_grad();
    backward(loss);
    opt_pi_.step();
    actor_loss = loss.item();
    if (step + 1 == cfg_.awr.policy_steps)
      entropy = mean(gaussian_entropy(d).detach()).item();
  }

  Diagnostics diag;
  diag.actor_loss = actor_loss;
  diag.critic_loss = critic_loss;
  diag.eta = cfg_.em.eta_init;
  diag.entropy = entropy;
  return diag;
}

std::unique_ptr<Learner> make_learner(const AlgorithmConfig& cfg,
                                      std::size_t obs_dim, std::size_t act_dim,
                                      double action_low, double action_high,
                                      Rng init_rng,
                                      const ObsNormalizer* normalizer) {
  cfg.validate();
  if (cfg.solver == Solver::Kl)
    return std::make_unique<SacLearner>(cfg, obs_dim, act_dim, action_low,
                                        action_high, init_rng, normalizer);
  if (cfg.g_estimate == GEstimate::TdLambda)
    return std::make_unique<AwrLearner>(cfg, obs_dim, act_dim, action_low,
                                        action_high, init_rng, normalizer);
  return std::make_unique<EmLearner>(cfg, obs_dim, act_dim, action_low,
                                     action_high, init_rng, normalizer);
}

}  // namespace uniac
