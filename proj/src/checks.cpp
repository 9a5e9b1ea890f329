#include "uniac/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "uniac/critic.hpp"
#include "uniac/em.hpp"
#include "uniac/exact.hpp"
#include "uniac/ops.hpp"
#include "uniac/policy.hpp"
#include "uniac/sac.hpp"

namespace uniac {

double gradcheck_max_rel_err(const std::function<Tensor()>& make_loss,
                             const std::vector<Tensor>& params, double h) {
  for (auto p : params) p.zero_grad();
  Tensor loss = make_loss();
  backward(loss);
  std::vector<std::vector<double>> ad;
  for (const Tensor& p : params) {
    auto g = p.grad();
    ad.emplace_back(g.begin(), g.end());
    if (ad.back().empty()) ad.back().assign(p.numel(), 0.0);
  }
  double worst = 0.0;
  NoGradGuard ng;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor p = params[pi];
    auto data = p.mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double x = data[i];
      data[i] = x + h;
      const double fp = make_loss().item();
      data[i] = x - h;
      const double fm = make_loss().item();
      data[i] = x;
      const double fd = (fp - fm) / (2.0 * h);
      const double a = ad[pi][i];
      const double rel =
          std::fabs(a - fd) / std::max({std::fabs(a), std::fabs(fd), 1e-3});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

namespace {

std::string fmt_err(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "max rel err %.3g", v);
  return buf;
}

// Random tensor with entries away from activation kinks.
Tensor rand_tensor(Shape shape, Rng& rng, double lo = -1.5, double hi = 1.5,
                   bool requires_grad = true) {
  std::vector<double> v(numel_of(shape));
  for (auto& x : v) {
    do {
      x = rng.uniform(lo, hi);
    } while (std::fabs(x) < 1e-3);
  }
  return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

struct Case {
  std::string name;
  // returns (loss builder, params) for one random instance
  std::function<std::pair<std::function<Tensor()>, std::vector<Tensor>>(Rng&)>
      make;
};

CheckResult run_case(const Case& c, Rng& rng, std::size_t instances,
                     double tol) {
  double worst = 0.0;
  for (std::size_t k = 0; k < instances; ++k) {
    auto [loss, params] = c.make(rng);
    worst = std::max(worst, gradcheck_max_rel_err(loss, params));
  }
  return {"gradcheck/" + c.name, worst < tol, fmt_err(worst)};
}

Mlp tiny_mlp(Rng& rng, std::size_t in, std::size_t hidden, std::size_t out,
             Activation act, bool ln) {
  MlpSpec spec;
  spec.layer_widths = {in, hidden, out};
  spec.activation = act;
  spec.layer_norm_first = ln;
  spec.weight_init = WeightInit::XavierUniform;
  spec.output_scale = 1.0;
  return Mlp::init(spec, rng);
}

GaussianDist rand_dist(Rng& rng, std::size_t b, std::size_t d,
                       Tensor* mean_out, Tensor* log_std_out) {
  *mean_out = rand_tensor({b, d}, rng, -1.0, 1.0);
  *log_std_out = rand_tensor({b, d}, rng, -1.2, 0.5);
  return GaussianDist{*mean_out, *log_std_out};
}

}  // namespace

std::vector<CheckResult> gradcheck_suite(std::uint64_t seed,
                                         std::size_t instances) {
  const double tol = 1e-4;
  std::vector<Case> cases;

  cases.push_back({"mlp_forward_relu", [](Rng& rng) {
    Mlp net = tiny_mlp(rng, 3, 5, 2, Activation::Relu, false);
    Tensor x = rand_tensor({4, 3}, rng);
    Tensor r = rand_tensor({4, 2}, rng, 0.2, 1.0, false);
    auto params = net.parameters();
    params.push_back(x);
    return std::make_pair(
        std::function<Tensor()>(
            [net, x, r] { return sum(mul(net.forward(x), r)); }),
        params);
  }});
  cases.push_back({"mlp_forward_elu_layer_norm", [](Rng& rng) {
    Mlp net = tiny_mlp(rng, 3, 6, 2, Activation::Elu, true);
    Tensor x = rand_tensor({4, 3}, rng);
    Tensor r = rand_tensor({4, 2}, rng, 0.2, 1.0, false);
    auto params = net.parameters();
    params.push_back(x);
    return std::make_pair(
        std::function<Tensor()>(
            [net, x, r] { return sum(mul(net.forward(x), r)); }),
        params);
  }});
  cases.push_back({"layer_norm", [](Rng& rng) {
    Tensor x = rand_tensor({3, 6}, rng);
    Tensor g = rand_tensor({6}, rng, 0.3, 1.5);
    Tensor b = rand_tensor({6}, rng, -0.5, 0.5);
    Tensor r = rand_tensor({3, 6}, rng, 0.2, 1.0, false);
    return std::make_pair(
        std::function<Tensor()>(
            [x, g, b, r] { return sum(mul(layer_norm(x, g, b), r)); }),
        std::vector<Tensor>{x, g, b});
  }});
  cases.push_back({"elu", [](Rng& rng) {
    Tensor x = rand_tensor({2, 7}, rng);
    return std::make_pair(
        std::function<Tensor()>([x] { return sum(square(elu(x))); }),
        std::vector<Tensor>{x});
  }});
  cases.push_back({"tanh_softplus_exp_log", [](Rng& rng) {
    Tensor x = rand_tensor({2, 5}, rng);
    Tensor y = rand_tensor({2, 5}, rng, 0.2, 2.0);
    return std::make_pair(std::function<Tensor()>([x, y] {
      return add(sum(tanh_t(softplus(x))), sum(log_t(exp_t(y))));
    }), std::vector<Tensor>{x, y});
  }});
  cases.push_back({"gaussian_log_prob", [](Rng& rng) {
    Tensor mu, ls_;
    GaussianDist d = rand_dist(rng, 3, 2, &mu, &ls_);
    Tensor a = rand_tensor({3, 2}, rng, -1.5, 1.5, false);
    return std::make_pair(
        std::function<Tensor()>([d, a] { return sum(gaussian_log_prob(d, a)); }),
        std::vector<Tensor>{mu, ls_});
  }});
  cases.push_back({"gaussian_entropy_kl", [](Rng& rng) {
    Tensor mp, lp, mq, lq;
    GaussianDist p = rand_dist(rng, 2, 3, &mp, &lp);
    GaussianDist q = rand_dist(rng, 2, 3, &mq, &lq);
    return std::make_pair(std::function<Tensor()>([p, q] {
      auto kl = gaussian_kl_decomposed(p, q);
      return add(sum(gaussian_entropy(p)),
                 add(sum(kl.first), scale(sum(kl.second), 2.0)));
    }), std::vector<Tensor>{mp, lp, mq, lq});
  }});
  cases.push_back({"tanh_rsample_log_prob", [](Rng& rng) {
    Tensor mu, ls_;
    GaussianDist d = rand_dist(rng, 3, 2, &mu, &ls_);
    Tensor noise = rand_tensor({3, 2}, rng, -1.5, 1.5, false);
    return std::make_pair(std::function<Tensor()>([d, noise] {
      TanhSample s = tanh_rsample(d, noise, -2.0, 2.0);
      return add(sum(s.log_prob), scale(sum(s.action_env), 0.5));
    }), std::vector<Tensor>{mu, ls_});
  }});
  cases.push_back({"tanh_log_prob_of_external", [](Rng& rng) {
    Tensor mu, ls_;
    GaussianDist d = rand_dist(rng, 3, 2, &mu, &ls_);
    std::vector<double> acts(6);
    for (auto& v : acts) v = rng.uniform(-1.8, 1.8);
    return std::make_pair(std::function<Tensor()>([d, acts] {
      return sum(tanh_log_prob_of(d, acts, -2.0, 2.0, 1e-6));
    }), std::vector<Tensor>{mu, ls_});
  }});
  cases.push_back({"action_penalty", [](Rng& rng) {
    // half the entries inside the box, half clearly outside; keep entries
    // away from the |x| = bound and x = 0 kinks
    std::vector<double> v(8);
    for (auto& x : v) {
      const double u = rng.uniform(0.1, 0.9);
      const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      x = sign * (rng.uniform01() < 0.5 ? u : u + 1.2);
    }
    Tensor mu = Tensor::from({4, 2}, std::move(v), true);
    return std::make_pair(std::function<Tensor()>([mu] {
      return sum(action_penalty(mu, 1.0, 10.0));
    }), std::vector<Tensor>{mu});
  }});
  cases.push_back({"critic_mse_regression", [](Rng& rng) {
    Mlp net = tiny_mlp(rng, 4, 6, 1, Activation::Relu, false);
    Tensor x = rand_tensor({5, 4}, rng);
    Tensor y = rand_tensor({5}, rng, -1.0, 1.0, false);
    auto params = net.parameters();
    return std::make_pair(std::function<Tensor()>([net, x, y] {
      Tensor out = net.forward(x);
      return mean(square(sub(reshape(out, {out.rows()}), y)));
    }), params);
  }});
  cases.push_back({"sac_actor_loss", [](Rng& rng) {
    const std::size_t b = 3, obs = 3, act = 2;
    Rng prng = rng.derive("p");
    Rng qrng = rng.derive("q");
    PolicyNet pi = PolicyNet::init(
        PolicyHeadKind::TanhGaussian, obs, act, {6}, Activation::Relu, false,
        WeightInit::XavierUniform, 1.0, 1.0, -1.0, 1.0, prng);
    QFunctionPair q = QFunctionPair::init(obs, act, {6}, Activation::Relu,
                                          false, WeightInit::XavierUniform,
                                          1.0, true, qrng);
    Tensor states = rand_tensor({b, obs}, rng, -1.0, 1.0, false);
    Tensor noise = rand_tensor({b, act}, rng, -1.2, 1.2, false);
    auto params = pi.parameters();
    auto qp = q.online_parameters();
    params.insert(params.end(), qp.begin(), qp.end());
    return std::make_pair(std::function<Tensor()>([states, pi, q, noise] {
      return sac_actor_loss(states, pi, q, 0.3, noise);
    }), params);
  }});
  cases.push_back({"sac_critic_loss", [](Rng& rng) {
    const std::size_t b = 4, obs = 3, act = 1;
    Rng qrng = rng.derive("q");
    QFunctionPair q = QFunctionPair::init(obs, act, {6}, Activation::Relu,
                                          false, WeightInit::XavierUniform,
                                          1.0, true, qrng);
    Tensor states = rand_tensor({b, obs}, rng, -1.0, 1.0, false);
    Tensor actions = rand_tensor({b, act}, rng, -1.0, 1.0, false);
    std::vector<double> targets(b);
    for (auto& v : targets) v = rng.uniform(-1.0, 1.0);
    return std::make_pair(std::function<Tensor()>([states, actions, q, targets] {
      return sac_critic_loss(states, actions, q, targets);
    }), q.online_parameters());
  }});
  cases.push_back({"temperature_loss", [](Rng& rng) {
    Tensor log_eta = Tensor::scalar(rng.uniform(-1.0, 1.0), true);
    std::vector<double> lps(8);
    for (auto& v : lps) v = rng.uniform(-3.0, 0.0);
    return std::make_pair(std::function<Tensor()>([lps, log_eta] {
      return temperature_loss(lps, log_eta, -1.0);
    }), std::vector<Tensor>{log_eta});
  }});
  cases.push_back({"dual_eta_loss", [](Rng& rng) {
    Tensor log_eta = Tensor::scalar(rng.uniform(-1.0, 0.5), true);
    std::vector<double> g(12);
    for (auto& v : g) v = rng.uniform(-1.0, 1.0);
    return std::make_pair(std::function<Tensor()>([g, log_eta] {
      return dual_eta_loss(g, log_eta, 0.1);
    }), std::vector<Tensor>{log_eta});
  }});
  cases.push_back({"m_step_trust_region_loss", [](Rng& rng) {
    const std::size_t b = 3, m = 4, obs = 2, act = 1;
    Rng prng = rng.derive("p");
    Rng qrng = rng.derive("prev");
    PolicyNet pi = PolicyNet::init(
        PolicyHeadKind::GaussianStateCov, obs, act, {5}, Activation::Elu, false,
        WeightInit::XavierUniform, 1.0, 0.7, -1.0, 1.0, prng);
    PolicyNet prev = PolicyNet::init(
        PolicyHeadKind::GaussianStateCov, obs, act, {5}, Activation::Elu, false,
        WeightInit::XavierUniform, 1.0, 0.7, -1.0, 1.0, qrng);
    Tensor states = rand_tensor({b * m, obs}, rng, -1.0, 1.0, false);
    std::vector<double> acts(b * m * act);
    for (auto& v : acts) v = rng.uniform(-1.2, 1.2);
    std::vector<double> w(b * m);
    for (auto& v : w) v = rng.uniform(0.0, 1.0);
    TrustRegionState tr{0.8, 1.3};
    return std::make_pair(std::function<Tensor()>([=] {
      GaussianDist d = pi.dist(states);
      Tensor lp = gaussian_log_prob(
          d, Tensor::from({b * m, act}, acts));
      Tensor pen = scale(mean(action_penalty(d.mean, 1.0, 1.0)), 10.0);
      Tensor m_loss = m_step_loss(reshape(lp, {b, m}), w, b, pen);
      GaussianDist dp;
      {
        NoGradGuard ng;
        dp = prev.dist(states);
      }
      auto kl = gaussian_kl_decomposed(dp, d);
      return trust_region_m_step(m_loss, kl.first, kl.second, tr, 1e-3, 1e-6);
    }), pi.parameters());
  }});

  std::vector<CheckResult> results;
  Rng root(seed);
  for (const Case& c : cases) {
    Rng rng = root.derive(c.name);
    results.push_back(run_case(c, rng, instances, tol));
  }
  return results;
}

std::vector<CheckResult> verify_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng root(seed);
  const std::size_t n_mdps = 20;

  // (a) exact EM iterations reach V* at eta = 0.1
  {
    bool pass = true;
    std::string detail;
    double worst_gap = 0.0;
    std::size_t worst_iters = 0;
    for (std::size_t k = 0; k < n_mdps; ++k) {
      Rng rng = root.derive("em", k);
      const std::size_t ns = 2 + k % 4, na = 2 + k % 3;
      MDPSpec mdp = random_mdp(ns, na, 0.9, rng);
      const auto vi = value_iteration(mdp);
      const double v_star = expected_initial_value(mdp, vi.v);
      TabularPolicy pi = TabularPolicy::uniform(ns, na);
      std::size_t iters = 0;
      double gap = 1e300;
      for (; iters < 200; ++iters) {
        const double v_pi =
            expected_initial_value(mdp, policy_evaluation(mdp, pi));
        gap = v_star - v_pi;
        if (gap <= 1e-3) break;
        pi = exact_em_iteration(mdp, pi, 0.1);
      }
      worst_gap = std::max(worst_gap, gap);
      worst_iters = std::max(worst_iters, iters);
      if (gap > 1e-3) pass = false;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "worst gap %.3g, worst iterations %zu",
                  worst_gap, worst_iters);
    out.push_back({"verify/em_reaches_v_star", pass, buf});
  }

  // (b) KL fixed point matches soft value iteration within 1e-8 TV
  {
    bool pass = true;
    double worst_tv = 0.0;
    for (std::size_t k = 0; k < n_mdps; ++k) {
      Rng rng = root.derive("kl", k);
      const std::size_t ns = 2 + k % 4, na = 2 + k % 3;
      MDPSpec mdp = random_mdp(ns, na, 0.9, rng);
      const double eta = 0.2 + 0.1 * double(k % 5);
      const auto soft = soft_value_iteration(mdp, eta);
      const TabularPolicy pi = exact_kl_fixed_point(mdp, eta);
      const double tv = total_variation(soft.policy, pi);
      worst_tv = std::max(worst_tv, tv);
      if (tv > 1e-8) pass = false;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst TV %.3g", worst_tv);
    out.push_back({"verify/kl_matches_soft_vi", pass, buf});
  }

  // (c) near-zero temperature recovers the greedy policy on unique optima
  {
    bool pass = true;
    double worst_tv = 0.0;
    std::size_t tested = 0;
    for (std::size_t k = 0; tested < n_mdps && k < 200; ++k) {
      Rng rng = root.derive("greedy", k);
      const std::size_t ns = 2 + k % 4, na = 2 + k % 3;
      MDPSpec mdp = random_mdp(ns, na, 0.9, rng);
      const auto vi = value_iteration(mdp);
      // demand a clear per-state optimal-action margin
      std::vector<double> q(ns * na);
      double margin = 1e300;
      for (std::size_t s = 0; s < ns; ++s) {
        double best = -1e300, second = -1e300;
        for (std::size_t a = 0; a < na; ++a) {
          double ev = 0.0;
          for (std::size_t s2 = 0; s2 < ns; ++s2)
            ev += mdp.p(s, a, s2) * vi.v[s2];
          const double qa = mdp.r(s, a) + mdp.gamma * ev;
          if (qa > best) {
            second = best;
            best = qa;
          } else {
            second = std::max(second, qa);
          }
        }
        margin = std::min(margin, best - second);
      }
      if (margin < 0.05) continue;
      ++tested;
      const auto soft = soft_value_iteration(mdp, 1e-3);
      const double tv = total_variation(soft.policy, vi.greedy);
      worst_tv = std::max(worst_tv, tv);
      if (tv > 1e-3) pass = false;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "worst TV %.3g on %zu unique-optimum MDPs",
                  worst_tv, tested);
    out.push_back({"verify/near_zero_eta_is_greedy", pass, buf});
  }

  return out;
}

}  // namespace uniac
