#pragma once

#include <span>
#include <vector>

#include "uniac/ops.hpp"
#include "uniac/policy.hpp"

namespace uniac {

enum class ZMode { SampleMeanZ, UnitZ };
enum class MStepMode { PlainSg, SgPlusTrustRegion };
enum class PriorSource { CurrentPolicy, ReplayMixture };
enum class PenaltyMode { FixedCoefficient, DualVariable };

// EM-solver knobs. eta stays positive because it is optimized as log eta.
struct EmConfig {
  double eta_init = 1.0;
  bool learn_eta = true;            // MPO dual; AWR/AWAC keep eta fixed
  double eta_lr = 1e-2;
  double dual_constraint = 0.1;     // epsilon in g(eta)
  std::size_t e_step_action_samples = 20;
  MStepMode m_step = MStepMode::SgPlusTrustRegion;
  double mean_constraint = 1e-3;
  double stddev_constraint = 1e-6;
  bool constraints_per_action_dim = true;  // divide by action dimensionality
  double multiplier_lr = 1.0;
  ZMode z_mode = ZMode::SampleMeanZ;
  double weight_clip = 20.0;        // <= 0 disables clipping (UNIT_Z only)
  PriorSource prior_source = PriorSource::CurrentPolicy;
  bool standardize_advantages = false;  // AWR batch standardization
  double soft_q_eta = 0.1;          // entropy temperature when G = soft Q
  std::size_t v_baseline_samples = 4;  // AWAC advantage baseline

  void validate() const;
};

// Per-state normalized posterior weights. g holds n_states * m optimality
// scores, row-major. SAMPLE_MEAN_Z: softmax(g/eta) per state, max-shifted.
// UNIT_Z: min(exp(g/eta), weight_clip) per sample.
std::vector<double> e_step_weights(std::span<const double> g,
                                   std::size_t n_states, std::size_t m,
                                   double eta, ZMode mode,
                                   double weight_clip = 0.0);

// Empirical KL(pi_q || pi_p) of SAMPLE_MEAN_Z weights, mean over states of
// sum_j w_j log(m * w_j).
double e_step_weight_kl(std::span<const double> weights, std::size_t n_states,
                        std::size_t m);

// REPS-style temperature dual g(eta) = eta*eps + eta*log mean exp(g/eta),
// batch-global, differentiable w.r.t. log_eta.
Tensor dual_eta_loss(std::span<const double> g, const Tensor& log_eta,
                     double eps);

// Pseudo-likelihood projection: -(1/n_states) sum_s sum_j w_j log pi(a_j|s),
// plus optional penalty terms. Weights are constants (E-step output).
Tensor m_step_loss(const Tensor& log_probs, std::span<const double> weights,
                   std::size_t n_states, const Tensor& penalty = {});

// Decoupled trust-region multipliers, updated by projected dual ascent.
struct TrustRegionState {
  double alpha_mean = 1.0;
  double alpha_cov = 1.0;
};

// total = m_loss + alpha_mean*(E[kl_mean] - eps_mean)
//               + alpha_cov *(E[kl_cov]  - eps_cov)
Tensor trust_region_m_step(const Tensor& m_loss, const Tensor& kl_mean_batch,
                           const Tensor& kl_cov_batch,
                           const TrustRegionState& tr, double eps_mean,
                           double eps_cov);

// alpha <- max(0, alpha + lr*(kl_hat - eps))
void trust_region_dual_ascent(TrustRegionState& tr, double kl_mean_hat,
                              double kl_cov_hat, double eps_mean,
                              double eps_cov, double lr);

}  // namespace uniac
