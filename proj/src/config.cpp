#include "uniac/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace uniac {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ContractViolation("config: key '" + key + "' expects a bool, got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw ContractViolation("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (...) {
    throw ContractViolation("config: key '" + key +
                            "' expects a non-negative integer, got '" + v + "'");
  }
}

template <class Enum>
struct EnumNames {
  std::vector<std::pair<Enum, const char*>> table;
  std::string to(Enum e) const {
    for (auto& [k, n] : table)
      if (k == e) return n;
    throw ContractViolation("config: unknown enum value");
  }
  Enum from(const std::string& s, const std::string& key) const {
    for (auto& [k, n] : table)
      if (s == n) return k;
    std::string opts;
    for (auto& [k, n] : table) opts += std::string(n) + " ";
    throw ContractViolation("config: key '" + key + "' got '" + s +
                            "', valid values: " + opts);
  }
};

const EnumNames<Preset> kPreset{{{Preset::Mpo, "mpo"},
                                 {Preset::Awr, "awr"},
                                 {Preset::Awac, "awac"},
                                 {Preset::Sac, "sac"},
                                 {Preset::Custom, "custom"}}};
const EnumNames<Solver> kSolver{{{Solver::Em, "em"}, {Solver::Kl, "kl"}}};
const EnumNames<GChoice> kGChoice{{{GChoice::Q, "q"},
                                   {GChoice::AdvantageV, "advantage_v"},
                                   {GChoice::SoftQ, "soft_q"}}};
const EnumNames<GEstimate> kGEstimate{
    {{GEstimate::Td0, "td0"},
     {GEstimate::TdLambda, "td_lambda"},
     {GEstimate::Td0ClippedDouble, "td0_clipped_double"}}};
const EnumNames<PolicyHeadKind> kHead{
    {{PolicyHeadKind::GaussianStateCov, "gaussian_state_cov"},
     {PolicyHeadKind::GaussianFixedCov, "gaussian_fixed_cov"},
     {PolicyHeadKind::GaussianSharedCov, "gaussian_shared_cov"},
     {PolicyHeadKind::TanhGaussian, "tanh_gaussian"}}};
const EnumNames<OutOfBounds> kOob{{{OutOfBounds::TanhSquash, "tanh_squash"},
                                   {OutOfBounds::ActionPenalty, "action_penalty"}}};
const EnumNames<Activation> kAct{{{Activation::Relu, "relu"},
                                  {Activation::Elu, "elu"},
                                  {Activation::Tanh, "tanh"}}};
const EnumNames<NetSize> kNet{{{NetSize::S, "s"}, {NetSize::M, "m"}, {NetSize::L, "l"}}};
const EnumNames<OptimizerKind> kOpt{{{OptimizerKind::Adam, "adam"},
                                     {OptimizerKind::SgdMomentum, "sgd_momentum"}}};
const EnumNames<WeightInit> kInit{{{WeightInit::XavierUniform, "xavier_uniform"},
                                   {WeightInit::Uniform, "uniform"}}};
const EnumNames<TargetMode> kTarget{{{TargetMode::Soft, "soft"},
                                     {TargetMode::Hard, "hard"},
                                     {TargetMode::None, "none"}}};
const EnumNames<PenaltyMode> kPenalty{
    {{PenaltyMode::FixedCoefficient, "fixed"},
     {PenaltyMode::DualVariable, "dual"}}};
const EnumNames<ZMode> kZ{{{ZMode::SampleMeanZ, "sample_mean"},
                           {ZMode::UnitZ, "unit"}}};
const EnumNames<MStepMode> kMStep{{{MStepMode::PlainSg, "plain_sg"},
                                   {MStepMode::SgPlusTrustRegion, "sg_trust_region"}}};
const EnumNames<PriorSource> kPrior{
    {{PriorSource::CurrentPolicy, "current_policy"},
     {PriorSource::ReplayMixture, "replay_mixture"}}};

// Single table describing every key: section, name, doc, getter, setter.
struct KeyDef {
  std::string section;
  std::string key;
  std::string doc;
  std::function<std::string(const AlgorithmConfig&)> get;
  std::function<void(AlgorithmConfig&, const std::string&)> set;
};

std::vector<KeyDef> key_table() {
  std::vector<KeyDef> t;
  auto add = [&](std::string section, std::string key, std::string doc,
                 auto get, auto set) {
    t.push_back({std::move(section), std::move(key), std::move(doc),
                 std::move(get), std::move(set)});
  };

#define STR_KEY(sec, name, field, doc) \
  add(sec, name, doc, [](const AlgorithmConfig& c) { return c.field; }, \
      [](AlgorithmConfig& c, const std::string& v) { c.field = v; })
#define U64_KEY(sec, name, field, doc) \
  add(sec, name, doc, \
      [](const AlgorithmConfig& c) { return std::to_string(c.field); }, \
      [](AlgorithmConfig& c, const std::string& v) { \
        c.field = parse_u64(v, name); \
      })
#define DBL_KEY(sec, name, field, doc) \
  add(sec, name, doc, \
      [](const AlgorithmConfig& c) { return fmt_double(c.field); }, \
      [](AlgorithmConfig& c, const std::string& v) { \
        c.field = parse_double(v, name); \
      })
#define BOOL_KEY(sec, name, field, doc) \
  add(sec, name, doc, \
      [](const AlgorithmConfig& c) { return std::string(bool_str(c.field)); }, \
      [](AlgorithmConfig& c, const std::string& v) { \
        c.field = parse_bool(v, name); \
      })
#define ENUM_KEY(sec, name, field, names, doc) \
  add(sec, name, doc, \
      [](const AlgorithmConfig& c) { return names.to(c.field); }, \
      [](AlgorithmConfig& c, const std::string& v) { \
        c.field = names.from(v, name); \
      })

  STR_KEY("run", "name", name, "run/config label");
  STR_KEY("run", "env", run.env,
          "point_mass_1d | pendulum_swing_up | pendulum_cliff");
  U64_KEY("run", "seed", run.seed, "master seed; all streams derive from it");
  U64_KEY("run", "total_steps", run.total_steps, "environment steps");
  U64_KEY("run", "eval_interval", run.eval_interval, "steps between evals");
  U64_KEY("run", "eval_episodes", run.eval_episodes, "episodes per eval");
  U64_KEY("run", "warmup_steps", run.warmup_steps, "uniform-random prefix");
  U64_KEY("run", "buffer_capacity", run.buffer_capacity, "replay capacity");
  U64_KEY("run", "batch_size", run.batch_size, "minibatch size");
  U64_KEY("run", "update_interval", run.update_interval,
          "env steps between update bursts");
  U64_KEY("run", "updates_per_interval", run.updates_per_interval,
          "update cycles per burst");
  add("run", "threads", "kernel threads (0 = serial reference kernels)",
      [](const AlgorithmConfig& c) { return std::to_string(c.run.threads); },
      [](AlgorithmConfig& c, const std::string& v) {
        c.run.threads = int(parse_u64(v, "threads"));
      });
  STR_KEY("run", "out_dir", run.out_dir, "output directory for run folders");

  ENUM_KEY("algorithm", "preset", preset, kPreset, "mpo|awr|awac|sac|custom");
  ENUM_KEY("algorithm", "solver", solver, kSolver, "em|kl");
  ENUM_KEY("algorithm", "g_choice", g_choice, kGChoice,
           "optimality score: q|advantage_v|soft_q");
  ENUM_KEY("algorithm", "g_estimate", g_estimate, kGEstimate,
           "td0|td_lambda|td0_clipped_double");
  ENUM_KEY("algorithm", "policy_head", policy_head, kHead,
           "gaussian_{state,fixed,shared}_cov|tanh_gaussian");
  ENUM_KEY("algorithm", "out_of_bounds", out_of_bounds, kOob,
           "tanh_squash|action_penalty");
  ENUM_KEY("algorithm", "activation", activation, kAct, "relu|elu|tanh");
  BOOL_KEY("algorithm", "layer_norm", layer_norm,
           "layer-norm + tanh after the first linear layer");
  ENUM_KEY("algorithm", "net_size", net_size, kNet,
           "s=(128,64) m=(256,256) l=(256,256,256)/(512,512,256)");

  ENUM_KEY("optim", "optimizer", optimizer, kOpt, "adam|sgd_momentum");
  DBL_KEY("optim", "momentum", momentum, "SGD momentum");
  DBL_KEY("optim", "policy_lr", policy_lr, "policy learning rate");
  DBL_KEY("optim", "value_lr", value_lr, "critic learning rate");
  ENUM_KEY("optim", "weight_init", weight_init, kInit, "xavier_uniform|uniform");
  DBL_KEY("optim", "output_scale_policy", output_scale_policy,
          "multiplier on the policy head's final-layer init");
  DBL_KEY("optim", "output_scale_value", output_scale_value,
          "multiplier on the critic's final-layer init");

  DBL_KEY("policy", "init_stddev_scale", init_stddev_scale,
          "initial action stddev");
  DBL_KEY("policy", "log_std_min", log_std_min, "log-std clamp floor");
  DBL_KEY("policy", "log_std_max", log_std_max, "log-std clamp ceiling");
  DBL_KEY("policy", "clip_eps", clip_eps,
          "pre-rescale action clip into [-1+eps, 1-eps]");
  ENUM_KEY("policy", "action_penalty_mode", penalty_mode, kPenalty,
           "fixed|dual");
  DBL_KEY("policy", "action_penalty_coeff", action_penalty_coeff,
          "fixed-mode quadratic penalty coefficient");
  DBL_KEY("policy", "action_penalty_constraint", action_penalty_constraint,
          "dual-mode constraint level");
  DBL_KEY("policy", "penalty_multiplier_lr", penalty_multiplier_lr,
          "dual-mode multiplier ascent rate");

  DBL_KEY("critic", "gamma", gamma, "discount factor");
  DBL_KEY("critic", "td_lambda", td_lambda, "lambda for TD(lambda)");
  ENUM_KEY("critic", "target_mode", target_mode, kTarget, "soft|hard|none");
  DBL_KEY("critic", "tau", tau, "soft target update rate");
  U64_KEY("critic", "hard_update_interval", hard_update_interval,
          "learner steps between hard target copies");
  BOOL_KEY("critic", "input_normalization", input_normalization,
           "running observation standardization");

  DBL_KEY("em", "eta_init", em.eta_init, "initial temperature");
  BOOL_KEY("em", "learn_eta", em.learn_eta, "optimize eta through the dual");
  DBL_KEY("em", "eta_lr", em.eta_lr, "learning rate for log eta");
  DBL_KEY("em", "dual_constraint", em.dual_constraint, "epsilon in g(eta)");
  U64_KEY("em", "e_step_action_samples", em.e_step_action_samples,
          "M actions per state in the E-step");
  ENUM_KEY("em", "m_step", em.m_step, kMStep, "plain_sg|sg_trust_region");
  DBL_KEY("em", "mean_constraint", em.mean_constraint,
          "trust-region KL budget, mean part");
  DBL_KEY("em", "stddev_constraint", em.stddev_constraint,
          "trust-region KL budget, covariance part");
  BOOL_KEY("em", "constraints_per_action_dim", em.constraints_per_action_dim,
           "divide both budgets by the action dimensionality");
  DBL_KEY("em", "multiplier_lr", em.multiplier_lr,
          "trust-region dual ascent rate");
  ENUM_KEY("em", "z_mode", em.z_mode, kZ, "sample_mean|unit");
  DBL_KEY("em", "weight_clip", em.weight_clip,
          "UNIT_Z exp-weight ceiling (<=0 disables)");
  ENUM_KEY("em", "prior_source", em.prior_source, kPrior,
           "current_policy|replay_mixture");
  BOOL_KEY("em", "standardize_advantages", em.standardize_advantages,
           "per-batch advantage standardization");
  DBL_KEY("em", "soft_q_eta", em.soft_q_eta,
          "entropy temperature when g_choice = soft_q under the EM solver");
  U64_KEY("em", "v_baseline_samples", em.v_baseline_samples,
          "policy samples for the Q-advantage baseline");

  DBL_KEY("sac", "eta_init", sac.eta_init, "initial temperature");
  DBL_KEY("sac", "eta_lr", sac.eta_lr, "learning rate for log eta");
  add("sac", "target_entropy", "auto (= -action_dim) or a number",
      [](const AlgorithmConfig& c) {
        return c.sac.auto_target_entropy ? std::string("auto")
                                         : fmt_double(c.sac.target_entropy);
      },
      [](AlgorithmConfig& c, const std::string& v) {
        if (v == "auto") {
          c.sac.auto_target_entropy = true;
        } else {
          c.sac.auto_target_entropy = false;
          c.sac.target_entropy = parse_double(v, "target_entropy");
        }
      });

  U64_KEY("awr", "iteration_interval", awr.iteration_interval,
          "env steps per AWR iteration");
  U64_KEY("awr", "value_steps", awr.value_steps, "value epochs per iteration");
  U64_KEY("awr", "policy_steps", awr.policy_steps, "policy epochs per iteration");

  U64_KEY("env", "max_episode_steps", env_params.max_episode_steps,
          "truncation horizon");
  DBL_KEY("env", "pendulum_dt", env_params.pendulum_dt, "integration step");
  DBL_KEY("env", "pendulum_max_torque", env_params.pendulum_max_torque,
          "action bound");
  DBL_KEY("env", "pendulum_max_speed", env_params.pendulum_max_speed,
          "speed clamp (swing-up) / hazard threshold (cliff)");
  DBL_KEY("env", "cliff_hazard_penalty", env_params.cliff_hazard_penalty,
          "terminal reward when the hazard trips");
  DBL_KEY("env", "point_mass_dt", env_params.point_mass_dt, "integration step");
  DBL_KEY("env", "point_mass_max_force", env_params.point_mass_max_force,
          "action bound");
  U64_KEY("env", "tabular_horizon", env_params.tabular_horizon,
          "episode length for tabular envs");

#undef STR_KEY
#undef U64_KEY
#undef DBL_KEY
#undef BOOL_KEY
#undef ENUM_KEY
  return t;
}

const std::vector<KeyDef>& keys() {
  static const std::vector<KeyDef> t = key_table();
  return t;
}

}  // namespace

std::vector<std::size_t> AlgorithmConfig::policy_widths() const {
  switch (net_size) {
    case NetSize::S: return {128, 64};
    case NetSize::M: return {256, 256};
    case NetSize::L: return {256, 256, 256};
  }
  throw ContractViolation("unknown net size");
}

std::vector<std::size_t> AlgorithmConfig::value_widths() const {
  switch (net_size) {
    case NetSize::S: return {128, 64};
    case NetSize::M: return {256, 256};
    case NetSize::L: return {512, 512, 256};
  }
  throw ContractViolation("unknown net size");
}

void AlgorithmConfig::validate() const {
  const bool tanh_head = policy_head == PolicyHeadKind::TanhGaussian;
  if (out_of_bounds == OutOfBounds::TanhSquash && !tanh_head)
    throw ContractViolation(
        "config: out_of_bounds=tanh_squash requires policy_head=tanh_gaussian");
  if (out_of_bounds == OutOfBounds::ActionPenalty && tanh_head)
    throw ContractViolation(
        "config: action_penalty cannot be combined with the tanh-squashed head "
        "(its support is already the action box); use a gaussian_* head");
  if (g_estimate == GEstimate::TdLambda) {
    if (solver == Solver::Kl)
      throw ContractViolation(
          "config: g_estimate=td_lambda requires the EM solver (the KL solver "
          "bootstraps a Q-function with TD(0))");
    if (g_choice != GChoice::AdvantageV)
      throw ContractViolation(
          "config: g_estimate=td_lambda estimates a state-value baseline; set "
          "g_choice=advantage_v");
  }
  if (g_choice == GChoice::AdvantageV && g_estimate != GEstimate::TdLambda)
    throw ContractViolation(
        "config: g_choice=advantage_v is estimated with td_lambda; set "
        "g_estimate=td_lambda");
  if (solver == Solver::Kl && g_choice == GChoice::AdvantageV)
    throw ContractViolation(
        "config: the KL solver supports g_choice q or soft_q");
  if (solver == Solver::Em && em.prior_source == PriorSource::ReplayMixture &&
      em.z_mode == ZMode::SampleMeanZ)
    throw ContractViolation(
        "config: replay_mixture stores one action per state; per-state "
        "normalization needs z_mode=unit");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ContractViolation("config: gamma must lie in [0, 1)");
  if (!(td_lambda >= 0.0 && td_lambda <= 1.0))
    throw ContractViolation("config: td_lambda must lie in [0, 1]");
  if (run.batch_size == 0) throw ContractViolation("config: batch_size is 0");
  if (!(clip_eps > 0.0 && clip_eps < 0.5))
    throw ContractViolation("config: clip_eps must lie in (0, 0.5)");
  em.validate();
  sac.validate();
}

AlgorithmConfig preset_config(Preset p) {
  AlgorithmConfig c;
  c.preset = p;
  switch (p) {
    case Preset::Mpo:
      c.name = "mpo";
      c.solver = Solver::Em;
      c.g_choice = GChoice::Q;
      c.g_estimate = GEstimate::Td0;  // single-step practical variant
      c.policy_head = PolicyHeadKind::GaussianStateCov;
      c.out_of_bounds = OutOfBounds::ActionPenalty;
      c.activation = Activation::Elu;
      c.layer_norm = true;
      c.net_size = NetSize::L;
      c.optimizer = OptimizerKind::Adam;
      c.policy_lr = 1e-4;
      c.value_lr = 1e-4;
      c.weight_init = WeightInit::Uniform;
      c.output_scale_policy = 1.0;
      c.output_scale_value = 1.0;
      c.init_stddev_scale = 0.5;
      c.target_mode = TargetMode::Hard;
      c.hard_update_interval = 100;
      c.em.learn_eta = true;
      c.em.eta_lr = 1e-2;
      c.em.dual_constraint = 0.1;
      c.em.e_step_action_samples = 20;
      c.em.m_step = MStepMode::SgPlusTrustRegion;
      c.em.mean_constraint = 1e-3;
      c.em.stddev_constraint = 1e-6;
      c.em.constraints_per_action_dim = true;
      c.em.z_mode = ZMode::SampleMeanZ;
      c.em.prior_source = PriorSource::CurrentPolicy;
      c.action_penalty_constraint = 1e-3;
      break;
    case Preset::Awr:
      c.name = "awr";
      c.solver = Solver::Em;
      c.g_choice = GChoice::AdvantageV;
      c.g_estimate = GEstimate::TdLambda;
      c.policy_head = PolicyHeadKind::GaussianFixedCov;
      c.out_of_bounds = OutOfBounds::ActionPenalty;
      c.activation = Activation::Relu;
      c.layer_norm = false;
      c.net_size = NetSize::S;
      c.optimizer = OptimizerKind::SgdMomentum;
      c.momentum = 0.9;
      c.policy_lr = 5e-5;
      c.value_lr = 1e-2;
      c.weight_init = WeightInit::XavierUniform;
      c.output_scale_policy = 1e-4;
      c.output_scale_value = 1e-2;
      c.init_stddev_scale = 0.4;
      c.target_mode = TargetMode::None;
      c.input_normalization = true;
      c.td_lambda = 0.95;
      c.action_penalty_coeff = 10.0;
      c.em.learn_eta = false;
      c.em.eta_init = 1.0;
      c.em.z_mode = ZMode::UnitZ;
      c.em.weight_clip = 20.0;
      c.em.prior_source = PriorSource::ReplayMixture;
      c.em.m_step = MStepMode::PlainSg;
      c.em.standardize_advantages = true;
      c.run.buffer_capacity = 50000;
      break;
    case Preset::Awac:
      c.name = "awac";
      c.solver = Solver::Em;
      c.g_choice = GChoice::Q;
      c.g_estimate = GEstimate::Td0ClippedDouble;
      c.policy_head = PolicyHeadKind::GaussianSharedCov;
      c.out_of_bounds = OutOfBounds::ActionPenalty;
      c.activation = Activation::Relu;
      c.layer_norm = false;
      c.net_size = NetSize::M;
      c.optimizer = OptimizerKind::Adam;
      c.policy_lr = 3e-4;
      c.value_lr = 3e-4;
      c.weight_init = WeightInit::XavierUniform;
      c.output_scale_policy = 1e-2;
      c.output_scale_value = 1.0;
      c.init_stddev_scale = 1.0;
      c.target_mode = TargetMode::Soft;
      c.tau = 5e-3;
      c.action_penalty_coeff = 10.0;
      c.em.learn_eta = false;
      c.em.eta_init = 1.0;
      c.em.z_mode = ZMode::UnitZ;
      c.em.weight_clip = 20.0;
      c.em.prior_source = PriorSource::ReplayMixture;
      c.em.m_step = MStepMode::PlainSg;
      c.em.v_baseline_samples = 4;
      break;
    case Preset::Sac:
    case Preset::Custom:
      c.name = p == Preset::Sac ? "sac" : "custom";
      c.preset = p;
      c.solver = Solver::Kl;
      c.g_choice = GChoice::SoftQ;
      c.g_estimate = GEstimate::Td0ClippedDouble;
      c.policy_head = PolicyHeadKind::TanhGaussian;
      c.out_of_bounds = OutOfBounds::TanhSquash;
      c.activation = Activation::Relu;
      c.layer_norm = false;
      c.net_size = NetSize::M;
      c.optimizer = OptimizerKind::Adam;
      c.policy_lr = 3e-4;
      c.value_lr = 3e-4;
      c.weight_init = WeightInit::XavierUniform;
      c.output_scale_policy = 1e-2;
      c.output_scale_value = 1.0;
      c.init_stddev_scale = 1.0;
      c.target_mode = TargetMode::Soft;
      c.tau = 5e-3;
      c.sac.eta_init = 1.0;
      c.sac.eta_lr = 3e-4;
      c.sac.auto_target_entropy = true;
      break;
  }
  return c;
}

Preset preset_from_string(const std::string& s) {
  return kPreset.from(s, "preset");
}
std::string preset_to_string(Preset p) { return kPreset.to(p); }

void apply_desk_profile(AlgorithmConfig& c) {
  c.net_size = NetSize::S;
  c.run.buffer_capacity = 50000;
  c.run.batch_size = 64;
  c.run.warmup_steps = 1000;
  c.run.eval_interval = 1000;
  c.run.eval_episodes = 10;
  if (c.preset == Preset::Mpo) {
    c.run.batch_size = 32;
    c.em.e_step_action_samples = 12;
  }
  if (c.preset == Preset::Awr) {
    c.awr.iteration_interval = 1000;
    c.awr.value_steps = 100;
    c.awr.policy_steps = 200;
    c.run.buffer_capacity = 20000;
  }
}

std::string serialize_config(const AlgorithmConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const KeyDef& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out << "\n";
      out << "[" << k.section << "]\n";
      section = k.section;
    }
    out << k.key << " = " << k.get(cfg) << "\n";
  }
  return out.str();
}

AlgorithmConfig parse_config(const std::string& text) {
  AlgorithmConfig cfg;
  bool preset_seen = false;
  // first pass: find the preset so remaining keys override its defaults
  std::istringstream scan(text);
  std::string line, section;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<std::tuple<std::string, std::string, std::string>> entries;
  std::size_t lineno = 0;
  while (std::getline(scan, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ContractViolation("config: malformed section header at line " +
                                std::to_string(lineno));
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ContractViolation("config: expected 'key = value' at line " +
                              std::to_string(lineno) + ": '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (section.empty())
      throw ContractViolation("config: key '" + key + "' appears before any "
                              "[section] header");
    entries.emplace_back(section, key, val);
    if (section == "algorithm" && key == "preset") {
      cfg = preset_config(kPreset.from(val, "preset"));
      preset_seen = true;
    }
  }
  (void)preset_seen;
  for (auto& [sec, key, val] : entries) {
    bool found = false;
    for (const KeyDef& k : keys()) {
      if (k.section == sec && k.key == key) {
        k.set(cfg, val);
        found = true;
        break;
      }
    }
    if (!found)
      throw ContractViolation("config: unknown key '" + sec + "." + key + "'");
  }
  return cfg;
}

AlgorithmConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ContractViolation("config: cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void save_config_file(const AlgorithmConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw ContractViolation("config: cannot write file '" + path + "'");
  out << serialize_config(cfg);
}

std::string config_schema() {
  std::ostringstream out;
  std::string section;
  for (const KeyDef& k : keys()) {
    if (k.section != section) {
      if (!section.empty()) out << "\n";
      out << "[" << k.section << "]\n";
      section = k.section;
    }
    out << "  " << k.key << " — " << k.doc << "\n";
  }
  return out.str();
}

namespace {

struct AxisChoice {
  std::string tag;  // empty for the base value
  std::function<void(AlgorithmConfig&)> apply;
};

std::vector<AxisChoice> axis_choices(const std::string& axis,
                                     const AlgorithmConfig& base) {
  std::vector<AxisChoice> out;
  if (axis == "double_q") {
    const bool base_double = base.double_q();
    out.push_back({"", [](AlgorithmConfig&) {}});
    out.push_back({base_double ? "single_q" : "double_q",
                   [base_double](AlgorithmConfig& c) {
                     c.g_estimate = base_double ? GEstimate::Td0
                                                : GEstimate::Td0ClippedDouble;
                   }});
    return out;
  }
  if (axis == "tanh") {
    const bool base_tanh = base.policy_head == PolicyHeadKind::TanhGaussian;
    out.push_back({"", [](AlgorithmConfig&) {}});
    out.push_back({base_tanh ? "no_tanh" : "tanh",
                   [base_tanh](AlgorithmConfig& c) {
                     if (base_tanh) {
                       c.policy_head = PolicyHeadKind::GaussianStateCov;
                       c.out_of_bounds = OutOfBounds::ActionPenalty;
                     } else {
                       c.policy_head = PolicyHeadKind::TanhGaussian;
                       c.out_of_bounds = OutOfBounds::TanhSquash;
                     }
                   }});
    return out;
  }
  if (axis == "elu") {
    const bool base_elu = base.activation == Activation::Elu;
    out.push_back({"", [](AlgorithmConfig&) {}});
    out.push_back({base_elu ? "relu" : "elu", [base_elu](AlgorithmConfig& c) {
                     c.activation =
                         base_elu ? Activation::Relu : Activation::Elu;
                   }});
    return out;
  }
  if (axis == "layer_norm") {
    const bool base_ln = base.layer_norm;
    out.push_back({"", [](AlgorithmConfig&) {}});
    out.push_back({base_ln ? "no_ln" : "ln", [base_ln](AlgorithmConfig& c) {
                     c.layer_norm = !base_ln;
                   }});
    return out;
  }
  if (axis == "net_size") {
    for (NetSize s : {NetSize::S, NetSize::M, NetSize::L}) {
      if (s == base.net_size) out.push_back({"", [](AlgorithmConfig&) {}});
      else
        out.push_back({"net_" + kNet.to(s),
                       [s](AlgorithmConfig& c) { c.net_size = s; }});
    }
    return out;
  }
  throw ContractViolation("expand_ablation_grid: unknown axis '" + axis +
                          "'; valid: double_q tanh elu layer_norm net_size");
}

}  // namespace

std::vector<AlgorithmConfig> expand_ablation_grid(
    const AlgorithmConfig& base, const std::vector<std::string>& axes) {
  std::vector<AlgorithmConfig> cells{base};
  std::vector<std::vector<std::string>> tags{{}};
  for (const std::string& axis : axes) {
    const auto choices = axis_choices(axis, base);
    std::vector<AlgorithmConfig> next;
    std::vector<std::vector<std::string>> next_tags;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      for (const AxisChoice& ch : choices) {
        AlgorithmConfig c = cells[i];
        ch.apply(c);
        auto t = tags[i];
        if (!ch.tag.empty()) t.push_back(ch.tag);
        next.push_back(std::move(c));
        next_tags.push_back(std::move(t));
      }
    }
    cells = std::move(next);
    tags = std::move(next_tags);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::string name = base.name;
    if (tags[i].empty()) {
      name += ".base";
    } else {
      name += ".";
      for (std::size_t j = 0; j < tags[i].size(); ++j) {
        if (j) name += "_";
        name += tags[i][j];
      }
    }
    cells[i].name = name;
  }
  return cells;
}

}  // namespace uniac
