#pragma once

#include <string>
#include <vector>

#include "uniac/config.hpp"
#include "uniac/env.hpp"
#include "uniac/learners.hpp"

namespace uniac {

struct TrainLogRecord {
  std::size_t step = 0;
  double episode_return_mean = 0.0;
  double episode_return_std = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double eta = 0.0;
  double policy_entropy = 0.0;
  double kl_mean = 0.0;
  double kl_cov = 0.0;
  double wall_seconds = 0.0;
};

inline const char* kLogCsvHeader =
    "step,episode_return_mean,episode_return_std,actor_loss,critic_loss,eta,"
    "policy_entropy,kl_mean,kl_cov,wall_seconds";

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;
};

// Deterministic-policy evaluation: mode actions, undiscounted per-episode
// sums, reproducible given seed.
EvalResult evaluate(const PolicyNet& policy, Env& env, std::size_t n_episodes,
                    std::uint64_t seed, const ObsNormalizer* norm = nullptr);

struct RunResult {
  std::string dir;
  std::vector<TrainLogRecord> log;
  double final_eval_mean = 0.0;
  double final_eval_std = 0.0;
  double final_entropy = 0.0;
  std::size_t total_updates = 0;
};

// Full training run driven by cfg.run: interleaves env stepping, buffer
// insertion and learner updates; evaluates every eval_interval steps and
// appends one CSV row per evaluation. Writes config.ini, log.csv and
// summary.json under <out_dir>/<name>-seed<seed>/.
RunResult run_training(const AlgorithmConfig& cfg);

std::string run_dir_for(const AlgorithmConfig& cfg);
std::string format_csv_row(const TrainLogRecord& r);
std::vector<TrainLogRecord> read_log_csv(const std::string& path);

}  // namespace uniac
