#include "uniac/env.hpp"

#include <cmath>

namespace uniac {

void MDPSpec::validate() const {
  if (n_states == 0 || n_actions == 0)
    throw ContractViolation("MDPSpec: empty state or action set");
  if (P.size() != n_states * n_actions * n_states ||
      R.size() != n_states * n_actions || initial.size() != n_states)
    throw DimensionError("MDPSpec: tensor extents do not match counts");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ContractViolation("MDPSpec: gamma must lie in [0, 1)");
  for (std::size_t s = 0; s < n_states; ++s)
    for (std::size_t a = 0; a < n_actions; ++a) {
      double mass = 0.0;
      for (std::size_t s2 = 0; s2 < n_states; ++s2) {
        const double v = p(s, a, s2);
        if (v < 0.0)
          throw ContractViolation("MDPSpec: negative transition probability");
        mass += v;
      }
      if (std::fabs(mass - 1.0) > 1e-12)
        throw ContractViolation("MDPSpec: P[" + std::to_string(s) + "," +
                                std::to_string(a) + ",.] sums to " +
                                std::to_string(mass));
    }
  double imass = 0.0;
  for (double v : initial) imass += v;
  if (std::fabs(imass - 1.0) > 1e-12)
    throw ContractViolation("MDPSpec: initial distribution off unit mass");
}

MDPSpec random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                   Rng& rng) {
  MDPSpec m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.gamma = gamma;
  m.P.resize(n_states * n_actions * n_states);
  m.R.resize(n_states * n_actions);
  m.initial.assign(n_states, 1.0 / double(n_states));
  for (std::size_t s = 0; s < n_states; ++s)
    for (std::size_t a = 0; a < n_actions; ++a) {
      // Dirichlet(1,...,1) row = normalized iid Exp(1) draws
      double total = 0.0;
      std::vector<double> e(n_states);
      for (auto& v : e) {
        v = -std::log(1.0 - rng.uniform01());
        total += v;
      }
      for (std::size_t s2 = 0; s2 < n_states; ++s2)
        m.P[(s * n_actions + a) * n_states + s2] = e[s2] / total;
      m.R[s * n_actions + a] = rng.uniform01();
    }
  // renormalize rows exactly to unit mass under validate()'s tolerance
  for (std::size_t row = 0; row < n_states * n_actions; ++row) {
    double mass = 0.0;
    for (std::size_t s2 = 0; s2 < n_states; ++s2) mass += m.P[row * n_states + s2];
    for (std::size_t s2 = 0; s2 < n_states; ++s2) m.P[row * n_states + s2] /= mass;
  }
  m.validate();
  return m;
}

std::pair<std::size_t, double> tabular_step(const MDPSpec& spec, std::size_t s,
                                            std::size_t a, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  std::size_t s2 = spec.n_states - 1;
  for (std::size_t k = 0; k < spec.n_states; ++k) {
    acc += spec.p(s, a, k);
    if (u < acc) {
      s2 = k;
      break;
    }
  }
  return {s2, spec.r(s, a)};
}

std::size_t sample_initial_state(const MDPSpec& spec, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.n_states; ++k) {
    acc += spec.initial[k];
    if (u < acc) return k;
  }
  return spec.n_states - 1;
}

double wrap_angle(double theta) {
  const double two_pi = 2.0 * M_PI;
  double w = std::fmod(theta + M_PI, two_pi);
  if (w < 0.0) w += two_pi;
  return w - M_PI;
}

namespace {

class PointMass1D final : public Env {
 public:
  explicit PointMass1D(const EnvParams& p) : p_(p), name_("point_mass_1d") {}

  std::vector<double> reset(std::uint64_t seed) override {
    Rng rng(seed);
    x_ = rng.uniform(-1.0, 1.0);
    v_ = rng.uniform(-1.0, 1.0);
    steps_ = 0;
    done_ = false;
    return {x_, v_};
  }

  EnvStep step(std::span<const double> action) override {
    if (done_) throw ContractViolation("point_mass_1d: episode already finished");
    const double a = action[0];
    x_ += p_.point_mass_dt * v_;
    v_ += p_.point_mass_dt * a;
    ++steps_;
    EnvStep out;
    out.observation = {x_, v_};
    out.reward = -(x_ * x_ + 0.1 * v_ * v_ + 0.001 * a * a);
    out.truncated = steps_ >= p_.max_episode_steps;
    done_ = out.truncated;
    return out;
  }

  std::size_t obs_dim() const override { return 2; }
  std::size_t act_dim() const override { return 1; }
  double action_low() const override { return -p_.point_mass_max_force; }
  double action_high() const override { return p_.point_mass_max_force; }
  std::size_t max_episode_steps() const override { return p_.max_episode_steps; }
  const std::string& name() const override { return name_; }

 private:
  EnvParams p_;
  std::string name_;
  double x_ = 0.0, v_ = 0.0;
  std::size_t steps_ = 0;
  bool done_ = false;
};

class Pendulum final : public Env {
 public:
  Pendulum(const EnvParams& p, bool cliff)
      : p_(p), cliff_(cliff),
        name_(cliff ? "pendulum_cliff" : "pendulum_swing_up") {}

  std::vector<double> reset(std::uint64_t seed) override {
    Rng rng(seed);
    theta_ = rng.uniform(-M_PI, M_PI);
    theta_dot_ = rng.uniform(-1.0, 1.0);
    steps_ = 0;
    done_ = false;
    return obs();
  }

  EnvStep step(std::span<const double> action) override {
    if (done_) throw ContractViolation(name_ + ": episode already finished");
    const double a = action[0];
    const double g = p_.pendulum_g, m = p_.pendulum_m, l = p_.pendulum_l;
    const double dt = p_.pendulum_dt;
    const double cost = wrap_angle(theta_) * wrap_angle(theta_) +
                        0.1 * theta_dot_ * theta_dot_ + 0.001 * a * a;
    const double acc =
        -(3.0 * g / (2.0 * l)) * std::sin(theta_ + M_PI) + 3.0 / (m * l * l) * a;
    theta_dot_ += dt * acc;
    bool hazard = false;
    if (cliff_) {
      hazard = std::fabs(theta_dot_) > p_.pendulum_max_speed;
    } else {
      theta_dot_ = std::min(std::max(theta_dot_, -p_.pendulum_max_speed),
                            p_.pendulum_max_speed);
    }
    theta_ += dt * theta_dot_;
    ++steps_;
    EnvStep out;
    out.observation = obs();
    if (hazard) {
      out.reward = p_.cliff_hazard_penalty;
      out.terminated = true;
    } else {
      out.reward = -cost;
      out.truncated = steps_ >= p_.max_episode_steps;
    }
    done_ = out.terminated || out.truncated;
    return out;
  }

  std::size_t obs_dim() const override { return 3; }
  std::size_t act_dim() const override { return 1; }
  double action_low() const override { return -p_.pendulum_max_torque; }
  double action_high() const override { return p_.pendulum_max_torque; }
  std::size_t max_episode_steps() const override { return p_.max_episode_steps; }
  const std::string& name() const override { return name_; }

 private:
  std::vector<double> obs() const {
    return {std::cos(theta_), std::sin(theta_), theta_dot_};
  }

  EnvParams p_;
  bool cliff_;
  std::string name_;
  double theta_ = 0.0, theta_dot_ = 0.0;
  std::size_t steps_ = 0;
  bool done_ = false;
};

class TabularEnv final : public Env {
 public:
  TabularEnv(MDPSpec spec, const EnvParams& p)
      : spec_(std::move(spec)), horizon_(p.tabular_horizon), name_("tabular") {
    spec_.validate();
  }

  std::vector<double> reset(std::uint64_t seed) override {
    rng_ = Rng(seed);
    state_ = sample_initial_state(spec_, rng_);
    steps_ = 0;
    done_ = false;
    return one_hot(state_);
  }

  EnvStep step(std::span<const double> action) override {
    if (done_) throw ContractViolation("tabular: episode already finished");
    // continuous action in [0, n_actions) is floored to an index
    auto a = std::size_t(std::min(std::max(action[0], 0.0),
                                  double(spec_.n_actions - 1)));
    auto [s2, r] = tabular_step(spec_, state_, a, rng_);
    state_ = s2;
    ++steps_;
    EnvStep out;
    out.observation = one_hot(state_);
    out.reward = r;
    out.truncated = steps_ >= horizon_;
    done_ = out.truncated;
    return out;
  }

  std::size_t obs_dim() const override { return spec_.n_states; }
  std::size_t act_dim() const override { return 1; }
  double action_low() const override { return 0.0; }
  double action_high() const override { return double(spec_.n_actions) - 1.0; }
  std::size_t max_episode_steps() const override { return horizon_; }
  const std::string& name() const override { return name_; }

 private:
  std::vector<double> one_hot(std::size_t s) const {
    std::vector<double> o(spec_.n_states, 0.0);
    o[s] = 1.0;
    return o;
  }

  MDPSpec spec_;
  std::size_t horizon_;
  std::string name_;
  Rng rng_{0};
  std::size_t state_ = 0;
  std::size_t steps_ = 0;
  bool done_ = false;
};

}  // namespace

std::unique_ptr<Env> make_env(const std::string& name, const EnvParams& params) {
  if (name == "point_mass_1d") return std::make_unique<PointMass1D>(params);
  if (name == "pendulum_swing_up")
    return std::make_unique<Pendulum>(params, false);
  if (name == "pendulum_cliff") return std::make_unique<Pendulum>(params, true);
  throw ContractViolation("unknown environment '" + name + "'");
}

std::unique_ptr<Env> make_tabular_env(MDPSpec spec, const EnvParams& params) {
  return std::make_unique<TabularEnv>(std::move(spec), params);
}

}  // namespace uniac
