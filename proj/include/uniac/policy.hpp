#pragma once

#include <span>
#include <utility>
#include <vector>

#include "uniac/nn.hpp"
#include "uniac/ops.hpp"
#include "uniac/rng.hpp"

namespace uniac {

// Batch diagonal Gaussian over actions. log_std arrives already clamped to a
// finite interval, so densities are always finite.
struct GaussianDist {
  Tensor mean;     // [B, A]
  Tensor log_std;  // [B, A]
  std::size_t batch() const { return mean.rows(); }
  std::size_t dim() const { return mean.cols(); }
};

// Exact diagonal-Gaussian log density, one value per batch row.
Tensor gaussian_log_prob(const GaussianDist& d, const Tensor& actions);

// Closed-form differential entropy per batch row.
Tensor gaussian_entropy(const GaussianDist& d);

// KL(p || q) split into a mean part (covariances held at q's values) and a
// covariance part (means held equal). The parts sum to the full KL.
std::pair<Tensor, Tensor> gaussian_kl_decomposed(const GaussianDist& p,
                                                 const GaussianDist& q);

// Componentwise clamp into [-1+eps, 1-eps] (pre-rescale coordinates).
std::vector<double> clip_action(std::vector<double> a, double eps);

// Quadratic out-of-bounds penalty on the policy mean, per batch row:
// coeff * sum_i max(0, |mean_i| - bound)^2.
Tensor action_penalty(const Tensor& mean, double bound, double coeff);

// Numerically stable log(1 - tanh(u)^2) = 2*(log 2 - u - softplus(-2u)),
// summed over the last dimension.
Tensor tanh_log_det_jacobian(const Tensor& pre_tanh);

struct TanhSample {
  Tensor action_env;  // [B, A], rescaled into the action box
  Tensor log_prob;    // [B]
  Tensor pre_tanh;    // [B, A]
};

// Reparameterized tanh-Gaussian sample: u = mean + std*noise, a = tanh(u)
// rescaled into [lo, hi]; log_prob carries the tanh and affine corrections.
TanhSample tanh_rsample(const GaussianDist& d, const Tensor& noise, double lo,
                        double hi);

// Log-prob of externally supplied env-coordinate actions under the squashed
// Gaussian; actions are clipped into the open support before atanh.
Tensor tanh_log_prob_of(const GaussianDist& d,
                        std::span<const double> env_actions, double lo,
                        double hi, double clip_eps);

enum class PolicyHeadKind {
  GaussianStateCov,
  GaussianFixedCov,
  GaussianSharedCov,
  TanhGaussian,
};

// Parametric policy: MLP trunk + one of the Gaussian heads, over a symmetric
// action box [lo, hi]^A.
struct PolicyNet {
  PolicyHeadKind head = PolicyHeadKind::GaussianStateCov;
  Mlp net;
  Tensor shared_log_std;  // GaussianSharedCov only
  double fixed_log_std = 0.0;
  double init_log_std = 0.0;  // offset on the state-dependent log-std output
  double log_std_min = -20.0, log_std_max = 2.0;
  double lo = -1.0, hi = 1.0;
  double clip_eps = 1e-6;
  std::size_t act_dim = 0;

  static PolicyNet init(PolicyHeadKind head, std::size_t obs_dim,
                        std::size_t act_dim,
                        const std::vector<std::size_t>& hidden,
                        Activation activation, bool layer_norm_first,
                        WeightInit weight_init, double output_scale,
                        double init_stddev_scale, double lo, double hi,
                        Rng& rng);

  GaussianDist dist(const Tensor& states) const;

  // Env-facing action selection (no tape).
  std::vector<double> act_sample(std::span<const double> obs, Rng& rng) const;
  std::vector<double> act_mode(std::span<const double> obs) const;

  // Differentiable log-prob of stored env actions (row-major [B*A]).
  Tensor log_prob_env(const Tensor& states,
                      std::span<const double> env_actions) const;

  struct Rsample {
    Tensor action;   // env coordinates
    Tensor log_prob; // [B]
  };
  // Reparameterized differentiable sample given external standard-normal noise.
  Rsample rsample(const Tensor& states, const Tensor& noise) const;

  std::vector<Tensor> parameters() const;
  std::vector<std::string> parameter_names(const std::string& prefix) const;
  void copy_from(const PolicyNet& other);

  bool squashed() const { return head == PolicyHeadKind::TanhGaussian; }
};

// Tabular softmax distribution over discrete actions; logits are a leaf
// parameter so the pseudo-likelihood M-step can be exercised exactly.
struct SoftmaxHead {
  Tensor logits;  // [S, A]

  explicit SoftmaxHead(std::size_t n_states, std::size_t n_actions)
      : logits(Tensor::zeros({n_states, n_actions}, true)) {}

  Tensor log_probs() const;  // [S, A]
  std::vector<double> probs() const;  // normalized, rows sum to 1
};

}  // namespace uniac
