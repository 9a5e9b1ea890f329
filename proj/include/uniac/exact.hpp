#pragma once

#include <utility>
#include <vector>

#include "uniac/env.hpp"

namespace uniac {

// Row-stochastic policy table indexed [s, a].
struct TabularPolicy {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> prob;  // n_states * n_actions

  static TabularPolicy uniform(std::size_t n_states, std::size_t n_actions);
  double p(std::size_t s, std::size_t a) const { return prob[s * n_actions + a]; }
  void validate() const;
};

struct ValueIterationResult {
  std::vector<double> v;
  TabularPolicy greedy;  // ties broken toward the lowest action index
};

ValueIterationResult value_iteration(const MDPSpec& spec, double tol = 1e-10,
                                     std::size_t max_iters = 1000000);

// Exact policy evaluation by direct linear solve of (I - gamma P_pi) V = R_pi.
std::vector<double> policy_evaluation(const MDPSpec& spec,
                                      const TabularPolicy& pi);
// Q^pi derived from the exact V^pi.
std::vector<double> policy_q_values(const MDPSpec& spec,
                                    const TabularPolicy& pi);

// Soft (entropy-regularized, uniform prior) optimal control.
// v is the fixed point of V = eta*log sum_a exp(Q/eta) (entropy convention);
// v_kl subtracts the absorbed uniform-prior constant eta*log|A|/(1-gamma).
struct SoftValueIterationResult {
  std::vector<double> v;       // entropy convention
  std::vector<double> v_kl;    // uniform-prior (KL) convention
  std::vector<double> q;       // soft Q, entropy convention
  TabularPolicy policy;        // pi(a|s) proportional to exp(Q_soft/eta)
};

SoftValueIterationResult soft_value_iteration(const MDPSpec& spec, double eta,
                                              double tol = 1e-12,
                                              std::size_t max_iters = 1000000);

// One exact EM step: evaluate Q^{pi_p} by linear solve, reweight
// pi' proportional to pi_p * exp(Q/eta). The tabular M-step projection is
// lossless, so pi' is returned directly.
TabularPolicy exact_em_iteration(const MDPSpec& spec, const TabularPolicy& pi_p,
                                 double eta);

// Regularized policy iteration with a fixed uniform prior; converges to the
// same policy as soft_value_iteration but through a different computation
// path (exact KL-regularized evaluation + Boltzmann improvement).
TabularPolicy exact_kl_fixed_point(const MDPSpec& spec, double eta,
                                   double tol = 1e-12,
                                   std::size_t max_iters = 100000);

// Soft value of an arbitrary policy under the KL convention
// (reward - eta*KL(pi || uniform) per step), via linear solve.
std::vector<double> soft_policy_evaluation_kl(const MDPSpec& spec,
                                              const TabularPolicy& pi,
                                              double eta);

// Helpers
double expected_initial_value(const MDPSpec& spec, const std::vector<double>& v);
double total_variation(const TabularPolicy& a, const TabularPolicy& b);

}  // namespace uniac
