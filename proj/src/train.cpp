#include "uniac/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "uniac/kernels.hpp"

namespace uniac {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> box_random_action(const Env& env, Rng& rng) {
  std::vector<double> a(env.act_dim());
  for (auto& v : a) v = rng.uniform(env.action_low(), env.action_high());
  return a;
}

}  // namespace

EvalResult evaluate(const PolicyNet& policy, Env& env, std::size_t n_episodes,
                    std::uint64_t seed, const ObsNormalizer* norm) {
  Rng seeds(seed);
  std::vector<double> returns;
  returns.reserve(n_episodes);
  for (std::size_t e = 0; e < n_episodes; ++e) {
    std::vector<double> obs = env.reset(seeds.derive("episode", e).next_u64());
    double ret = 0.0;
    while (true) {
      std::vector<double> o = obs;
      if (norm) norm->apply_in_place(o);
      EnvStep step = env.step(policy.act_mode(o));
      ret += step.reward;
      obs = std::move(step.observation);
      if (step.terminated || step.truncated) break;
    }
    returns.push_back(ret);
  }
  EvalResult out;
  for (double r : returns) out.mean += r;
  out.mean /= double(n_episodes);
  for (double r : returns) out.std += (r - out.mean) * (r - out.mean);
  out.std = std::sqrt(out.std / double(n_episodes));
  return out;
}

std::string run_dir_for(const AlgorithmConfig& cfg) {
  return cfg.run.out_dir + "/" + cfg.name + "-seed" +
         std::to_string(cfg.run.seed);
}

std::string format_csv_row(const TrainLogRecord& r) {
  std::ostringstream out;
  out << r.step << "," << fmt(r.episode_return_mean) << ","
      << fmt(r.episode_return_std) << "," << fmt(r.actor_loss) << ","
      << fmt(r.critic_loss) << "," << fmt(r.eta) << ","
      << fmt(r.policy_entropy) << "," << fmt(r.kl_mean) << ","
      << fmt(r.kl_cov) << ",";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", r.wall_seconds);
  out << buf;
  return out.str();
}

std::vector<TrainLogRecord> read_log_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("read_log_csv: cannot open '" + path + "'");
  std::vector<TrainLogRecord> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  if (line != kLogCsvHeader)
    throw ContractViolation("read_log_csv: unexpected header in '" + path + "'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TrainLogRecord r;
    std::istringstream ls(line);
    std::string cell;
    auto next = [&]() -> double {
      if (!std::getline(ls, cell, ','))
        throw ContractViolation("read_log_csv: short row in '" + path + "'");
      return std::stod(cell);
    };
    r.step = std::size_t(next());
    r.episode_return_mean = next();
    r.episode_return_std = next();
    r.actor_loss = next();
    r.critic_loss = next();
    r.eta = next();
    r.policy_entropy = next();
    r.kl_mean = next();
    r.kl_cov = next();
    r.wall_seconds = next();
    out.push_back(r);
  }
  return out;
}

RunResult run_training(const AlgorithmConfig& cfg) {
  cfg.validate();
  kern::set_threads(cfg.run.threads);

  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  auto env = make_env(cfg.run.env, cfg.env_params);
  auto eval_env = make_env(cfg.run.env, cfg.env_params);
  const std::size_t obs_dim = env->obs_dim();
  const std::size_t act_dim = env->act_dim();

  Rng master(cfg.run.seed);
  Rng rng_act = master.derive("act");
  Rng rng_learn = master.derive("learn");
  Rng rng_episodes = master.derive("episodes");
  Rng rng_eval = master.derive("eval");

  ObsNormalizer norm(obs_dim, cfg.input_normalization);
  auto learner = make_learner(cfg, obs_dim, act_dim, env->action_low(),
                              env->action_high(), master.derive("init"), &norm);
  ReplayBuffer buffer(cfg.run.buffer_capacity);

  const std::string dir = run_dir_for(cfg);
  std::filesystem::create_directories(dir);
  save_config_file(cfg, dir + "/config.ini");
  std::ofstream csv(dir + "/log.csv");
  csv << kLogCsvHeader << "\n";
  csv.flush();

  RunResult result;
  result.dir = dir;

  std::uint64_t episode_id = 0;
  std::uint32_t step_in_episode = 0;
  std::vector<double> obs =
      env->reset(rng_episodes.derive("episode", episode_id).next_u64());
  norm.observe(obs);

  Diagnostics diag;
  const std::size_t interval = learner->update_interval();
  for (std::size_t t = 1; t <= cfg.run.total_steps; ++t) {
    std::vector<double> action;
    if (t <= cfg.run.warmup_steps) {
      action = box_random_action(*env, rng_act);
    } else {
      std::vector<double> o = obs;
      norm.apply_in_place(o);
      action = learner->policy().act_sample(o, rng_act);
    }
    EnvStep step = env->step(action);

    Transition tr;
    tr.s = obs;
    tr.a = action;
    tr.r = step.reward;
    tr.s_next = step.observation;
    tr.terminated = step.terminated;
    tr.truncated = step.truncated;
    tr.episode_id = episode_id;
    tr.step_index = step_in_episode;
    buffer.push(std::move(tr));

    if (step.terminated || step.truncated) {
      ++episode_id;
      step_in_episode = 0;
      obs = env->reset(rng_episodes.derive("episode", episode_id).next_u64());
    } else {
      ++step_in_episode;
      obs = step.observation;
    }
    norm.observe(obs);

    if (t > cfg.run.warmup_steps && t % interval == 0) {
      for (std::size_t u = 0; u < cfg.run.updates_per_interval; ++u) {
        diag = learner->update(buffer, rng_learn);
        ++result.total_updates;
      }
    }

    if (t % cfg.run.eval_interval == 0) {
      const std::uint64_t eval_seed =
          rng_eval.derive("round", t / cfg.run.eval_interval).next_u64();
      EvalResult ev = evaluate(learner->policy(), *eval_env,
                               cfg.run.eval_episodes, eval_seed, &norm);
      TrainLogRecord rec;
      rec.step = t;
      rec.episode_return_mean = ev.mean;
      rec.episode_return_std = ev.std;
      rec.actor_loss = diag.actor_loss;
      rec.critic_loss = diag.critic_loss;
      rec.eta = diag.eta;
      rec.policy_entropy = diag.entropy;
      rec.kl_mean = diag.kl_mean;
      rec.kl_cov = diag.kl_cov;
      rec.wall_seconds = wall();
      csv << format_csv_row(rec) << "\n";
      csv.flush();
      result.log.push_back(rec);
    }
  }

  if (!result.log.empty()) {
    result.final_eval_mean = result.log.back().episode_return_mean;
    result.final_eval_std = result.log.back().episode_return_std;
    result.final_entropy = result.log.back().policy_entropy;
  }

  nlohmann::json summary;
  summary["name"] = cfg.name;
  summary["preset"] = preset_to_string(cfg.preset);
  summary["env"] = cfg.run.env;
  summary["seed"] = cfg.run.seed;
  summary["total_steps"] = cfg.run.total_steps;
  summary["total_updates"] = result.total_updates;
  summary["final_eval_mean"] = result.final_eval_mean;
  summary["final_eval_std"] = result.final_eval_std;
  summary["final_policy_entropy"] = result.final_entropy;
  summary["final_eta"] = diag.eta;
  summary["wall_seconds"] = wall();
  summary["settings_provenance"] =
      "desk-scale artifact defaults; thresholds are calibration targets for "
      "this library, not reproductions of published benchmark numbers";
  std::ofstream js(dir + "/summary.json");
  js << summary.dump(2) << "\n";

  return result;
}

}  // namespace uniac
