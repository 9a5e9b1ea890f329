#include "uniac/policy.hpp"

#include <algorithm>
#include <cmath>

namespace uniac {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kLog2 = 0.69314718055994530941723212145818;

void check_action_shape(const GaussianDist& d, const Tensor& a) {
  if (a.rows() != d.batch() || a.cols() != d.dim())
    throw DimensionError("gaussian_log_prob: actions " + shape_str(a.shape()) +
                         " vs mean " + shape_str(d.mean.shape()));
}
}  // namespace

Tensor gaussian_log_prob(const GaussianDist& d, const Tensor& actions) {
  check_action_shape(d, actions);
  // -0.5*((a-mu)/sigma)^2 - log sigma, summed over dims, minus (d/2)log(2pi)
  Tensor z = mul(sub(actions, d.mean), exp_t(neg(d.log_std)));
  Tensor per_dim = sub(scale(square(z), -0.5), d.log_std);
  return add_scalar(sum_last(per_dim), -0.5 * double(d.dim()) * kLog2Pi);
}

Tensor gaussian_entropy(const GaussianDist& d) {
  const double c = 0.5 * double(d.dim()) * (kLog2Pi + 1.0);
  return add_scalar(sum_last(d.log_std), c);
}

std::pair<Tensor, Tensor> gaussian_kl_decomposed(const GaussianDist& p,
                                                 const GaussianDist& q) {
  if (p.batch() != q.batch() || p.dim() != q.dim())
    throw DimensionError("gaussian_kl_decomposed: mismatched distributions");
  // mean part: 0.5 * sum (mu_p - mu_q)^2 / sigma_q^2
  Tensor zm = mul(sub(p.mean, q.mean), exp_t(neg(q.log_std)));
  Tensor kl_mean = sum_last(scale(square(zm), 0.5));
  // cov part: sum [ log(sigma_q/sigma_p) + 0.5*(sigma_p/sigma_q)^2 - 0.5 ]
  Tensor dls = sub(p.log_std, q.log_std);
  Tensor ratio_sq = exp_t(scale(dls, 2.0));
  Tensor per_dim = add_scalar(add(neg(dls), scale(ratio_sq, 0.5)), -0.5);
  return {kl_mean, sum_last(per_dim)};
}

std::vector<double> clip_action(std::vector<double> a, double eps) {
  if (!(eps > 0.0 && eps < 0.5))
    throw ContractViolation("clip_action: eps must lie in (0, 0.5)");
  for (double& v : a) v = std::min(std::max(v, -1.0 + eps), 1.0 - eps);
  return a;
}

Tensor action_penalty(const Tensor& mean, double bound, double coeff) {
  if (coeff < 0.0)
    throw ContractViolation("action_penalty: coefficient must be >= 0");
  Tensor excess = max_scalar(add_scalar(abs_t(mean), -bound), 0.0);
  return scale(sum_last(square(excess)), coeff);
}

Tensor tanh_log_det_jacobian(const Tensor& pre_tanh) {
  Tensor inner = add_scalar(add(neg(pre_tanh), neg(softplus(scale(pre_tanh, -2.0)))), kLog2);
  return sum_last(scale(inner, 2.0));
}

TanhSample tanh_rsample(const GaussianDist& d, const Tensor& noise, double lo,
                        double hi) {
  if (noise.rows() != d.batch() || noise.cols() != d.dim())
    throw DimensionError("tanh_rsample: noise " + shape_str(noise.shape()) +
                         " vs mean " + shape_str(d.mean.shape()));
  const double half = 0.5 * (hi - lo);
  const double center = 0.5 * (hi + lo);
  Tensor u = add(d.mean, mul(exp_t(d.log_std), noise));
  Tensor squashed = tanh_t(u);
  Tensor action = add_scalar(scale(squashed, half), center);
  Tensor log_prob = sub(gaussian_log_prob(d, u), tanh_log_det_jacobian(u));
  if (half != 1.0)
    log_prob = add_scalar(log_prob, -double(d.dim()) * std::log(half));
  return {action, log_prob, u};
}

Tensor tanh_log_prob_of(const GaussianDist& d,
                        std::span<const double> env_actions, double lo,
                        double hi, double clip_eps) {
  const std::size_t n = d.batch() * d.dim();
  if (env_actions.size() != n)
    throw DimensionError("tanh_log_prob_of: expected " + std::to_string(n) +
                         " action values, got " +
                         std::to_string(env_actions.size()));
  const double half = 0.5 * (hi - lo);
  const double center = 0.5 * (hi + lo);
  std::vector<double> pre(n);
  for (std::size_t i = 0; i < n; ++i) {
    double y = (env_actions[i] - center) / half;
    y = std::min(std::max(y, -1.0 + clip_eps), 1.0 - clip_eps);
    pre[i] = std::atanh(y);
  }
  Tensor u = Tensor::from({d.batch(), d.dim()}, std::move(pre));
  Tensor log_prob = sub(gaussian_log_prob(d, u), tanh_log_det_jacobian(u));
  if (half != 1.0)
    log_prob = add_scalar(log_prob, -double(d.dim()) * std::log(half));
  return log_prob;
}

PolicyNet PolicyNet::init(PolicyHeadKind head, std::size_t obs_dim,
                          std::size_t act_dim,
                          const std::vector<std::size_t>& hidden,
                          Activation activation, bool layer_norm_first,
                          WeightInit weight_init, double output_scale,
                          double init_stddev_scale, double lo, double hi,
                          Rng& rng) {
  PolicyNet p;
  p.head = head;
  p.act_dim = act_dim;
  p.lo = lo;
  p.hi = hi;
  const bool state_cov = head == PolicyHeadKind::GaussianStateCov ||
                         head == PolicyHeadKind::TanhGaussian;
  MlpSpec spec;
  spec.layer_widths.push_back(obs_dim);
  for (std::size_t h : hidden) spec.layer_widths.push_back(h);
  spec.layer_widths.push_back(state_cov ? 2 * act_dim : act_dim);
  spec.activation = activation;
  spec.layer_norm_first = layer_norm_first;
  spec.weight_init = weight_init;
  spec.output_scale = output_scale;
  p.net = Mlp::init(spec, rng);
  const double log_scale = std::log(init_stddev_scale);
  if (state_cov) {
    p.init_log_std = log_scale;
  } else if (head == PolicyHeadKind::GaussianSharedCov) {
    p.shared_log_std = Tensor::full({act_dim}, log_scale, true);
  } else {
    p.fixed_log_std = log_scale;
  }
  return p;
}

GaussianDist PolicyNet::dist(const Tensor& states) const {
  Tensor out = net.forward(states);
  const std::size_t b = out.rows();
  GaussianDist d;
  switch (head) {
    case PolicyHeadKind::GaussianStateCov:
    case PolicyHeadKind::TanhGaussian: {
      d.mean = slice_cols(out, 0, act_dim);
      Tensor raw = slice_cols(out, act_dim, 2 * act_dim);
      d.log_std = clamp(add_scalar(raw, init_log_std), log_std_min, log_std_max);
      break;
    }
    case PolicyHeadKind::GaussianSharedCov:
      d.mean = out;
      d.log_std = clamp(broadcast_row(shared_log_std, b), log_std_min, log_std_max);
      break;
    case PolicyHeadKind::GaussianFixedCov:
      d.mean = out;
      d.log_std = Tensor::full({b, act_dim}, fixed_log_std);
      break;
  }
  return d;
}

std::vector<double> PolicyNet::act_sample(std::span<const double> obs,
                                          Rng& rng) const {
  NoGradGuard ng;
  Tensor s = Tensor::from({1, obs.size()}, {obs.begin(), obs.end()});
  GaussianDist d = dist(s);
  std::vector<double> a(act_dim);
  auto mu = d.mean.data();
  auto ls = d.log_std.data();
  for (std::size_t i = 0; i < act_dim; ++i)
    a[i] = mu[i] + std::exp(ls[i]) * rng.normal();
  if (squashed()) {
    for (double& v : a) v = std::tanh(v);
    a = clip_action(std::move(a), clip_eps);
    const double half = 0.5 * (hi - lo), center = 0.5 * (hi + lo);
    for (double& v : a) v = center + half * v;
  } else {
    for (double& v : a) v = std::min(std::max(v, lo), hi);
  }
  return a;
}

std::vector<double> PolicyNet::act_mode(std::span<const double> obs) const {
  NoGradGuard ng;
  Tensor s = Tensor::from({1, obs.size()}, {obs.begin(), obs.end()});
  GaussianDist d = dist(s);
  std::vector<double> a(d.mean.data().begin(), d.mean.data().end());
  if (squashed()) {
    for (double& v : a) v = std::tanh(v);
    a = clip_action(std::move(a), clip_eps);
    const double half = 0.5 * (hi - lo), center = 0.5 * (hi + lo);
    for (double& v : a) v = center + half * v;
  } else {
    for (double& v : a) v = std::min(std::max(v, lo), hi);
  }
  return a;
}

Tensor PolicyNet::log_prob_env(const Tensor& states,
                               std::span<const double> env_actions) const {
  GaussianDist d = dist(states);
  if (squashed()) return tanh_log_prob_of(d, env_actions, lo, hi, clip_eps);
  Tensor a = Tensor::from({d.batch(), act_dim},
                          {env_actions.begin(), env_actions.end()});
  return gaussian_log_prob(d, a);
}

PolicyNet::Rsample PolicyNet::rsample(const Tensor& states,
                                      const Tensor& noise) const {
  GaussianDist d = dist(states);
  if (squashed()) {
    TanhSample s = tanh_rsample(d, noise, lo, hi);
    return {s.action_env, s.log_prob};
  }
  Tensor a = add(d.mean, mul(exp_t(d.log_std), noise));
  return {a, gaussian_log_prob(d, a)};
}

std::vector<Tensor> PolicyNet::parameters() const {
  auto out = net.parameters();
  if (head == PolicyHeadKind::GaussianSharedCov) out.push_back(shared_log_std);
  return out;
}

std::vector<std::string> PolicyNet::parameter_names(
    const std::string& prefix) const {
  auto out = net.parameter_names(prefix);
  if (head == PolicyHeadKind::GaussianSharedCov)
    out.push_back(prefix + ".log_std");
  return out;
}

void PolicyNet::copy_from(const PolicyNet& other) {
  net.copy_from(other.net);
  if (head == PolicyHeadKind::GaussianSharedCov) {
    auto d = shared_log_std.mutable_data();
    auto s = other.shared_log_std.data();
    std::copy(s.begin(), s.end(), d.begin());
  }
}

Tensor SoftmaxHead::log_probs() const {
  return sub_colvec(logits, logsumexp_last(logits));
}

std::vector<double> SoftmaxHead::probs() const {
  NoGradGuard ng;
  Tensor lp = log_probs();
  std::vector<double> out(lp.data().begin(), lp.data().end());
  for (double& v : out) v = std::exp(v);
  return out;
}

}  // namespace uniac
