#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "uniac/common.hpp"
#include "uniac/rng.hpp"

namespace uniac {

// Explicit finite MDP for the exact oracles. P is indexed [s][a][s'] and R is
// indexed [s][a]; every P row must sum to 1 within 1e-12.
struct MDPSpec {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> P;        // n_states * n_actions * n_states
  std::vector<double> R;        // n_states * n_actions
  std::vector<double> initial;  // n_states
  double gamma = 0.99;

  double p(std::size_t s, std::size_t a, std::size_t s2) const {
    return P[(s * n_actions + a) * n_states + s2];
  }
  double r(std::size_t s, std::size_t a) const { return R[s * n_actions + a]; }

  void validate() const;
};

// Seeded random MDP: Dirichlet(1,...,1) transition rows, rewards U(0,1),
// uniform initial distribution.
MDPSpec random_mdp(std::size_t n_states, std::size_t n_actions, double gamma,
                   Rng& rng);

// One draw from the MDP: s' ~ P[s,a,.], r = R[s,a].
std::pair<std::size_t, double> tabular_step(const MDPSpec& spec, std::size_t s,
                                            std::size_t a, Rng& rng);
std::size_t sample_initial_state(const MDPSpec& spec, Rng& rng);

struct EnvStep {
  std::vector<double> observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

// Desk-scale environments behind one stepping interface. Episodes end with
// terminated (environment hazard, no bootstrap) or truncated (time limit,
// bootstrap allowed); stepping a finished episode is a contract violation.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  virtual EnvStep step(std::span<const double> action) = 0;
  virtual std::size_t obs_dim() const = 0;
  virtual std::size_t act_dim() const = 0;
  virtual double action_low() const = 0;
  virtual double action_high() const = 0;
  virtual std::size_t max_episode_steps() const = 0;
  virtual const std::string& name() const = 0;
};

struct EnvParams {
  std::size_t max_episode_steps = 200;
  // pendulum (swing-up and cliff)
  double pendulum_g = 10.0, pendulum_m = 1.0, pendulum_l = 1.0;
  double pendulum_dt = 0.05;
  double pendulum_max_torque = 2.0;
  double pendulum_max_speed = 8.0;   // swing-up clamps; cliff terminates past it
  double cliff_hazard_penalty = -2000.0;
  // point mass
  double point_mass_dt = 0.05;
  double point_mass_max_force = 1.0;
  // tabular
  std::size_t tabular_horizon = 100;
};

// Known names: point_mass_1d, pendulum_swing_up, pendulum_cliff.
std::unique_ptr<Env> make_env(const std::string& name,
                              const EnvParams& params = {});
std::unique_ptr<Env> make_tabular_env(MDPSpec spec, const EnvParams& params = {});

// Wraps an angle into [-pi, pi).
double wrap_angle(double theta);

}  // namespace uniac
