#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uniac/em.hpp"
#include "uniac/env.hpp"
#include "uniac/nn.hpp"
#include "uniac/optim.hpp"
#include "uniac/policy.hpp"
#include "uniac/sac.hpp"

namespace uniac {

enum class Solver { Em, Kl };
enum class Preset { Mpo, Awr, Awac, Sac, Custom };
enum class GChoice { Q, AdvantageV, SoftQ };
enum class GEstimate { Td0, TdLambda, Td0ClippedDouble };
enum class NetSize { S, M, L };
enum class OutOfBounds { TanhSquash, ActionPenalty };
enum class TargetMode { Soft, Hard, None };

struct RunConfig {
  std::string env = "pendulum_swing_up";
  std::uint64_t seed = 0;
  std::size_t total_steps = 30000;
  std::size_t eval_interval = 1000;
  std::size_t eval_episodes = 10;
  std::size_t warmup_steps = 1000;
  std::size_t buffer_capacity = 100000;
  std::size_t batch_size = 256;
  std::size_t update_interval = 1;
  std::size_t updates_per_interval = 1;
  int threads = 0;
  std::string out_dir = "runs";
};

// AWR trains in iterations: refresh lambda-returns, then minibatch epochs.
struct AwrIterConfig {
  std::size_t iteration_interval = 1000;
  std::size_t value_steps = 100;
  std::size_t policy_steps = 200;
};

// One row of the component factorization plus every scalar the presets pin.
struct AlgorithmConfig {
  std::string name = "custom";
  Preset preset = Preset::Custom;
  Solver solver = Solver::Kl;
  GChoice g_choice = GChoice::SoftQ;
  GEstimate g_estimate = GEstimate::Td0ClippedDouble;
  PolicyHeadKind policy_head = PolicyHeadKind::TanhGaussian;
  OutOfBounds out_of_bounds = OutOfBounds::TanhSquash;
  Activation activation = Activation::Relu;
  bool layer_norm = false;
  NetSize net_size = NetSize::M;

  OptimizerKind optimizer = OptimizerKind::Adam;
  double momentum = 0.9;
  double policy_lr = 3e-4;
  double value_lr = 3e-4;
  WeightInit weight_init = WeightInit::XavierUniform;
  double output_scale_policy = 1e-2;
  double output_scale_value = 1.0;

  double init_stddev_scale = 1.0;
  double log_std_min = -20.0, log_std_max = 2.0;
  double clip_eps = 1e-6;
  PenaltyMode penalty_mode = PenaltyMode::FixedCoefficient;
  double action_penalty_coeff = 10.0;
  double action_penalty_constraint = 1e-3;
  double penalty_multiplier_lr = 1.0;

  double gamma = 0.99;
  double td_lambda = 0.95;
  TargetMode target_mode = TargetMode::Soft;
  double tau = 5e-3;
  std::size_t hard_update_interval = 100;
  bool input_normalization = false;

  EmConfig em;
  SacConfig sac;
  RunConfig run;
  AwrIterConfig awr;
  EnvParams env_params;

  bool double_q() const { return g_estimate == GEstimate::Td0ClippedDouble; }
  std::vector<std::size_t> policy_widths() const;
  std::vector<std::size_t> value_widths() const;

  // Rejects invalid axis combinations with actionable messages.
  void validate() const;
};

AlgorithmConfig preset_config(Preset p);
Preset preset_from_string(const std::string& s);
std::string preset_to_string(Preset p);

// Desk-scale overlay: shrinks nets/batches/sample counts so a full training
// run fits a desktop-core budget. Keeps every algorithmic axis and
// non-scale scalar of the preset.
void apply_desk_profile(AlgorithmConfig& cfg);

// Plain-text key=value/[section] round trip.
std::string serialize_config(const AlgorithmConfig& cfg);
AlgorithmConfig parse_config(const std::string& text);
AlgorithmConfig load_config_file(const std::string& path);
void save_config_file(const AlgorithmConfig& cfg, const std::string& path);
std::string config_schema();

// Cartesian expansion over named ablation axes: double_q, tanh, elu,
// layer_norm, net_size. Cell names encode the non-base choices
// (e.g. sac.single_q, mpo.tanh, awr.elu_ln, mpo.net_m).
std::vector<AlgorithmConfig> expand_ablation_grid(
    const AlgorithmConfig& base, const std::vector<std::string>& axes);

}  // namespace uniac
