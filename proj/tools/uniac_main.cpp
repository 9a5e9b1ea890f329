#include <cstdio>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uniac/checks.hpp"
#include "uniac/config.hpp"
#include "uniac/kernels.hpp"
#include "uniac/plot.hpp"
#include "uniac/train.hpp"

namespace {

int report(const std::vector<uniac::CheckResult>& results) {
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %-42s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

struct RunFlags {
  std::string config_path;
  std::string preset;
  std::string env;
  std::uint64_t seed = std::uint64_t(-1);
  long long steps = -1;
  std::string out;
  bool desk = false;
  int threads = -1;
};

uniac::AlgorithmConfig resolve_config(const RunFlags& f) {
  uniac::AlgorithmConfig cfg;
  if (!f.config_path.empty()) {
    cfg = uniac::load_config_file(f.config_path);
    if (!f.preset.empty())
      throw uniac::ContractViolation(
          "pass either --config or --preset, not both");
  } else if (!f.preset.empty()) {
    cfg = uniac::preset_config(uniac::preset_from_string(f.preset));
  } else {
    throw uniac::ContractViolation("one of --config or --preset is required");
  }
  if (f.desk) uniac::apply_desk_profile(cfg);
  if (!f.env.empty()) cfg.run.env = f.env;
  if (f.seed != std::uint64_t(-1)) cfg.run.seed = f.seed;
  if (f.steps >= 0) cfg.run.total_steps = std::size_t(f.steps);
  if (!f.out.empty()) cfg.run.out_dir = f.out;
  if (f.threads >= 0) cfg.run.threads = f.threads;
  return cfg;
}

void add_run_flags(CLI::App* app, RunFlags* f) {
  app->add_option("--config", f->config_path, "config file path");
  app->add_option("--preset", f->preset, "mpo|awr|awac|sac");
  app->add_option("--env", f->env, "environment name");
  app->add_option("--seed", f->seed, "master seed");
  app->add_option("--steps", f->steps, "total environment steps");
  app->add_option("--out", f->out, "output directory");
  app->add_flag("--desk", f->desk, "apply the desk-scale profile");
  app->add_option("--threads", f->threads,
                  "kernel threads (0 = serial reference kernels)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "uniac: compositional off-policy actor-critic lab (EM/KL solvers, "
      "tabular oracles, ablation grids)"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "train one configuration");
  add_run_flags(run_cmd, &run_flags);

  RunFlags grid_flags;
  std::string axes_csv;
  std::size_t grid_seeds = 1;
  std::size_t jobs = 1;
  auto* grid_cmd =
      app.add_subcommand("grid", "expand ablation axes and launch every cell");
  add_run_flags(grid_cmd, &grid_flags);
  grid_cmd->add_option("--axes", axes_csv,
                       "comma list of: double_q,tanh,elu,layer_norm,net_size")
      ->required();
  grid_cmd->add_option("--seeds", grid_seeds, "seeds per cell (0..n-1 offsets)");
  grid_cmd->add_option("--jobs", jobs, "cells trained concurrently");

  auto* verify_cmd =
      app.add_subcommand("verify", "exact dynamic-programming oracle suite");
  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference gradient suite");

  std::vector<std::string> plot_dirs;
  std::string plot_out = "plots";
  auto* plot_cmd =
      app.add_subcommand("plot", "learning curves + summary table from runs");
  plot_cmd->add_option("dirs", plot_dirs, "run directories")->required();
  plot_cmd->add_option("--out", plot_out, "output directory");

  std::string schema_out;
  auto* schema_cmd = app.add_subcommand("schema", "print the config schema");
  (void)schema_cmd;
  (void)schema_out;

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      uniac::AlgorithmConfig cfg = resolve_config(run_flags);
      uniac::RunResult res = uniac::run_training(cfg);
      std::printf("run %s: %zu updates, final eval %.2f +- %.2f -> %s\n",
                  cfg.name.c_str(), res.total_updates, res.final_eval_mean,
                  res.final_eval_std, res.dir.c_str());
      return 0;
    }
    if (grid_cmd->parsed()) {
      uniac::AlgorithmConfig base = resolve_config(grid_flags);
      std::vector<std::string> axes;
      std::string cur;
      for (char c : axes_csv + ",") {
        if (c == ',') {
          if (!cur.empty()) axes.push_back(cur);
          cur.clear();
        } else {
          cur += c;
        }
      }
      auto cells = uniac::expand_ablation_grid(base, axes);
      std::vector<uniac::AlgorithmConfig> launches;
      for (const auto& cell : cells)
        for (std::size_t s = 0; s < grid_seeds; ++s) {
          uniac::AlgorithmConfig c = cell;
          c.run.seed = base.run.seed + s;
          launches.push_back(std::move(c));
        }
      std::printf("grid: %zu cells x %zu seeds = %zu runs\n", cells.size(),
                  grid_seeds, launches.size());
      std::size_t next = 0;
      while (next < launches.size()) {
        std::vector<std::future<uniac::RunResult>> batch;
        for (std::size_t j = 0; j < jobs && next < launches.size(); ++j, ++next)
          batch.push_back(std::async(std::launch::async, uniac::run_training,
                                     launches[next]));
        for (auto& fut : batch) {
          uniac::RunResult res = fut.get();
          std::printf("  %-28s final eval %10.2f +- %8.2f  (%s)\n",
                      res.dir.c_str(), res.final_eval_mean, res.final_eval_std,
                      res.dir.c_str());
        }
      }
      return 0;
    }
    if (verify_cmd->parsed()) return report(uniac::verify_suite());
    if (gradcheck_cmd->parsed()) return report(uniac::gradcheck_suite());
    if (plot_cmd->parsed()) {
      auto written = uniac::emit_plots(plot_dirs, plot_out);
      for (const auto& p : written) std::printf("wrote %s\n", p.c_str());
      return 0;
    }
    if (schema_cmd->parsed()) {
      std::fputs(uniac::config_schema().c_str(), stdout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
