#include "uniac/exact.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace uniac {

namespace {

std::vector<double> q_from_v(const MDPSpec& spec, const std::vector<double>& v) {
  std::vector<double> q(spec.n_states * spec.n_actions);
  for (std::size_t s = 0; s < spec.n_states; ++s)
    for (std::size_t a = 0; a < spec.n_actions; ++a) {
      double ev = 0.0;
      for (std::size_t s2 = 0; s2 < spec.n_states; ++s2)
        ev += spec.p(s, a, s2) * v[s2];
      q[s * spec.n_actions + a] = spec.r(s, a) + spec.gamma * ev;
    }
  return q;
}

// Solves (I - gamma P_pi) V = c for an arbitrary per-state cost/reward c.
std::vector<double> solve_linear(const MDPSpec& spec, const TabularPolicy& pi,
                                 const std::vector<double>& c) {
  const auto n = Eigen::Index(spec.n_states);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    b[Eigen::Index(s)] = c[s];
    for (std::size_t s2 = 0; s2 < spec.n_states; ++s2) {
      double pss = 0.0;
      for (std::size_t a = 0; a < spec.n_actions; ++a)
        pss += pi.p(s, a) * spec.p(s, a, s2);
      A(Eigen::Index(s), Eigen::Index(s2)) -= spec.gamma * pss;
    }
  }
  Eigen::VectorXd v = A.partialPivLu().solve(b);
  return {v.data(), v.data() + n};
}

}  // namespace

TabularPolicy TabularPolicy::uniform(std::size_t n_states,
                                     std::size_t n_actions) {
  TabularPolicy pi;
  pi.n_states = n_states;
  pi.n_actions = n_actions;
  pi.prob.assign(n_states * n_actions, 1.0 / double(n_actions));
  return pi;
}

void TabularPolicy::validate() const {
  for (std::size_t s = 0; s < n_states; ++s) {
    double mass = 0.0;
    for (std::size_t a = 0; a < n_actions; ++a) {
      if (p(s, a) < 0.0) throw ContractViolation("TabularPolicy: negative prob");
      mass += p(s, a);
    }
    if (std::fabs(mass - 1.0) > 1e-12)
      throw ContractViolation("TabularPolicy: row " + std::to_string(s) +
                              " sums to " + std::to_string(mass));
  }
}

ValueIterationResult value_iteration(const MDPSpec& spec, double tol,
                                     std::size_t max_iters) {
  spec.validate();
  std::vector<double> v(spec.n_states, 0.0);
  for (std::size_t it = 0; it < max_iters; ++it) {
    const std::vector<double> q = q_from_v(spec, v);
    double delta = 0.0;
    for (std::size_t s = 0; s < spec.n_states; ++s) {
      double best = q[s * spec.n_actions];
      for (std::size_t a = 1; a < spec.n_actions; ++a)
        best = std::max(best, q[s * spec.n_actions + a]);
      delta = std::max(delta, std::fabs(best - v[s]));
      v[s] = best;
    }
    if (delta < tol) break;
  }
  ValueIterationResult out;
  out.v = v;
  out.greedy.n_states = spec.n_states;
  out.greedy.n_actions = spec.n_actions;
  out.greedy.prob.assign(spec.n_states * spec.n_actions, 0.0);
  const std::vector<double> q = q_from_v(spec, v);
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < spec.n_actions; ++a)
      if (q[s * spec.n_actions + a] > q[s * spec.n_actions + best]) best = a;
    out.greedy.prob[s * spec.n_actions + best] = 1.0;
  }
  return out;
}

std::vector<double> policy_evaluation(const MDPSpec& spec,
                                      const TabularPolicy& pi) {
  std::vector<double> r_pi(spec.n_states, 0.0);
  for (std::size_t s = 0; s < spec.n_states; ++s)
    for (std::size_t a = 0; a < spec.n_actions; ++a)
      r_pi[s] += pi.p(s, a) * spec.r(s, a);
  return solve_linear(spec, pi, r_pi);
}

std::vector<double> policy_q_values(const MDPSpec& spec,
                                    const TabularPolicy& pi) {
  return q_from_v(spec, policy_evaluation(spec, pi));
}

SoftValueIterationResult soft_value_iteration(const MDPSpec& spec, double eta,
                                              double tol,
                                              std::size_t max_iters) {
  if (!(eta > 0.0))
    throw ContractViolation("soft_value_iteration: eta must be positive");
  spec.validate();
  const double log_a = std::log(double(spec.n_actions));
  std::vector<double> v(spec.n_states, 0.0);
  std::vector<double> q;
  for (std::size_t it = 0; it < max_iters; ++it) {
    q = q_from_v(spec, v);
    double delta = 0.0;
    for (std::size_t s = 0; s < spec.n_states; ++s) {
      const double* row = q.data() + s * spec.n_actions;
      double mx = row[0];
      for (std::size_t a = 1; a < spec.n_actions; ++a) mx = std::max(mx, row[a]);
      double acc = 0.0;
      for (std::size_t a = 0; a < spec.n_actions; ++a)
        acc += std::exp((row[a] - mx) / eta);
      const double nv = mx + eta * std::log(acc);
      delta = std::max(delta, std::fabs(nv - v[s]));
      v[s] = nv;
    }
    if (delta < tol) break;
  }
  SoftValueIterationResult out;
  out.v = v;
  out.q = q_from_v(spec, v);
  out.v_kl.resize(spec.n_states);
  const double offset = eta * log_a / (1.0 - spec.gamma);
  for (std::size_t s = 0; s < spec.n_states; ++s) out.v_kl[s] = v[s] - offset;
  out.policy.n_states = spec.n_states;
  out.policy.n_actions = spec.n_actions;
  out.policy.prob.resize(spec.n_states * spec.n_actions);
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    const double* row = out.q.data() + s * spec.n_actions;
    double mx = row[0];
    for (std::size_t a = 1; a < spec.n_actions; ++a) mx = std::max(mx, row[a]);
    double acc = 0.0;
    for (std::size_t a = 0; a < spec.n_actions; ++a)
      acc += std::exp((row[a] - mx) / eta);
    for (std::size_t a = 0; a < spec.n_actions; ++a)
      out.policy.prob[s * spec.n_actions + a] =
          std::exp((row[a] - mx) / eta) / acc;
  }
  return out;
}

TabularPolicy exact_em_iteration(const MDPSpec& spec, const TabularPolicy& pi_p,
                                 double eta) {
  if (!(eta > 0.0))
    throw ContractViolation("exact_em_iteration: eta must be positive");
  const std::vector<double> q = policy_q_values(spec, pi_p);
  TabularPolicy out = pi_p;
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    const double* row = q.data() + s * spec.n_actions;
    double mx = row[0];
    for (std::size_t a = 1; a < spec.n_actions; ++a) mx = std::max(mx, row[a]);
    double z = 0.0;
    for (std::size_t a = 0; a < spec.n_actions; ++a) {
      const double w = pi_p.p(s, a) * std::exp((row[a] - mx) / eta);
      out.prob[s * spec.n_actions + a] = w;
      z += w;
    }
    for (std::size_t a = 0; a < spec.n_actions; ++a)
      out.prob[s * spec.n_actions + a] /= z;
  }
  return out;
}

std::vector<double> soft_policy_evaluation_kl(const MDPSpec& spec,
                                              const TabularPolicy& pi,
                                              double eta) {
  // per-state KL(pi(.|s) || uniform); 0*log0 reads as 0
  std::vector<double> c(spec.n_states, 0.0);
  const double log_a = std::log(double(spec.n_actions));
  for (std::size_t s = 0; s < spec.n_states; ++s) {
    double kl = 0.0, r_pi = 0.0;
    for (std::size_t a = 0; a < spec.n_actions; ++a) {
      const double p = pi.p(s, a);
      if (p > 0.0) kl += p * (std::log(p) + log_a);
      r_pi += p * spec.r(s, a);
    }
    c[s] = r_pi - eta * kl;
  }
  return solve_linear(spec, pi, c);
}

TabularPolicy exact_kl_fixed_point(const MDPSpec& spec, double eta, double tol,
                                   std::size_t max_iters) {
  if (!(eta > 0.0))
    throw ContractViolation("exact_kl_fixed_point: eta must be positive");
  spec.validate();
  TabularPolicy pi = TabularPolicy::uniform(spec.n_states, spec.n_actions);
  for (std::size_t it = 0; it < max_iters; ++it) {
    const std::vector<double> v = soft_policy_evaluation_kl(spec, pi, eta);
    TabularPolicy next = pi;
    for (std::size_t s = 0; s < spec.n_states; ++s) {
      std::vector<double> qs(spec.n_actions);
      double mx = -1e300;
      for (std::size_t a = 0; a < spec.n_actions; ++a) {
        double ev = 0.0;
        for (std::size_t s2 = 0; s2 < spec.n_states; ++s2)
          ev += spec.p(s, a, s2) * v[s2];
        qs[a] = spec.r(s, a) + spec.gamma * ev;
        mx = std::max(mx, qs[a]);
      }
      double z = 0.0;
      for (std::size_t a = 0; a < spec.n_actions; ++a) {
        qs[a] = std::exp((qs[a] - mx) / eta);
        z += qs[a];
      }
      for (std::size_t a = 0; a < spec.n_actions; ++a)
        next.prob[s * spec.n_actions + a] = qs[a] / z;
    }
    const double tv = total_variation(pi, next);
    pi = next;
    if (tv < tol) break;
  }
  return pi;
}

double expected_initial_value(const MDPSpec& spec,
                              const std::vector<double>& v) {
  double acc = 0.0;
  for (std::size_t s = 0; s < spec.n_states; ++s) acc += spec.initial[s] * v[s];
  return acc;
}

double total_variation(const TabularPolicy& a, const TabularPolicy& b) {
  double worst = 0.0;
  for (std::size_t s = 0; s < a.n_states; ++s) {
    double tv = 0.0;
    for (std::size_t k = 0; k < a.n_actions; ++k)
      tv += std::fabs(a.p(s, k) - b.p(s, k));
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

}  // namespace uniac
