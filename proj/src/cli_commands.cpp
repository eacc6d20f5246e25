#include "posh/cli_commands.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "posh/config.hpp"
#include "posh/render.hpp"
#include "posh/simulation.hpp"

namespace posh {

namespace {

namespace fs = std::filesystem;

RunConfig load_with_overrides(const CliOverrides& opts) {
  if (opts.config_path.empty()) throw std::runtime_error("missing --config PATH");
  RunConfig rc = load_run_config(opts.config_path);
  if (!opts.out_dir.empty()) rc.out_dir = opts.out_dir;
  if (opts.has_seed) rc.trial.seed = opts.seed;
  if (opts.runs > 0) rc.runs = opts.runs;
  if (!opts.variant.empty()) rc.trial.variant = parse_variant(opts.variant);
  if (opts.has_render) rc.render = opts.render;
  rc.verbose = rc.verbose || opts.verbose;
  return rc;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

nlohmann::json step_to_json(const StepRecord& rec) {
  nlohmann::json j;
  j["t"] = rec.time_index;
  j["true"] = {rec.true_position.x(), rec.true_position.y()};
  j["velocity"] = {rec.true_velocity.x(), rec.true_velocity.y()};
  j["measured"] = {rec.measured_position.x(), rec.measured_position.y()};
  j["collision"] = rec.collision;
  j["path_cost"] = rec.path_cost;
  j["lm_iterations"] = rec.lm_iterations;
  j["lm_initial_error"] = rec.lm_initial_error;
  j["lm_final_error"] = rec.lm_final_error;
  j["signature"] = rec.signature;
  j["switched"] = rec.switched;
  j["optimize_seconds"] = rec.optimize_seconds;
  j["step_seconds"] = rec.step_seconds;
  return j;
}

RenderFrame base_frame(const RunConfig& rc) {
  RenderFrame f;
  f.ws_min = rc.trial.environment.ws_min;
  f.ws_max = rc.trial.environment.ws_max;
  f.robot_radius = rc.trial.environment.robot_radius;
  f.goal = rc.trial.goal.position;
  return f;
}

void write_frames(const RunConfig& rc, const TrialResult& res, const fs::path& dir) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < res.steps.size(); ++i) {
    const StepRecord& rec = res.steps[i];
    RenderFrame f = base_frame(rc);
    f.obstacles = rec.obstacles;
    f.robot = res.executed_path[i];  // true position when this step planned
    f.executed.assign(res.executed_path.begin(), res.executed_path.begin() + i + 1);
    f.planned = rec.planned;
    f.pruned_segments = rec.pruned_segments;
    f.graph_edges = rec.graph_edges;
    char name[32];
    std::snprintf(name, sizeof(name), "step_%03d.svg", rec.time_index);
    write_file(dir / name, render_svg(f));
  }
  RenderFrame f = base_frame(rc);
  f.obstacles = res.steps.empty() ? rc.trial.environment.obstacles : res.steps.back().obstacles;
  f.executed = res.executed_path;
  f.robot = res.executed_path.empty() ? rc.trial.start.position : res.executed_path.back();
  write_file(dir / "final.svg", render_svg(f));
}

int run_single_trial(const CliOverrides& opts, bool frames_only) {
  RunConfig rc = load_with_overrides(opts);
  TrialConfig tc = rc.trial;
  tc.record_steps = true;
  const TrialResult res = run_trial(tc);

  fs::create_directories(rc.out_dir);
  const fs::path out(rc.out_dir);
  if (!frames_only) {
    std::string lines;
    for (const StepRecord& rec : res.steps) {
      lines += step_to_json(rec).dump();
      lines += '\n';
    }
    write_file(out / "steps.jsonl", lines);

    nlohmann::json s;
    s["environment"] = rc.trial.environment.name;
    s["variant"] = variant_name(tc.variant);
    s["seed"] = tc.seed;
    s["success"] = res.success;
    s["completed"] = res.completed;
    s["planning_failed"] = res.planning_failed;
    s["collision_steps"] = res.collision_steps;
    s["total_steps"] = res.total_steps;
    s["distance"] = res.distance;
    s["switches"] = res.switches;
    s["final_goal_distance"] = res.final_goal_distance;
    write_file(out / "summary.json", s.dump(2) + "\n");
  }
  if (frames_only || rc.render) {
    write_frames(rc, res, out / "frames");
  }

  std::cout << variant_name(tc.variant) << " on " << rc.trial.environment.name
            << ": success=" << (res.success ? "yes" : "no") << " steps=" << res.total_steps
            << " collisions=" << res.collision_steps << " distance=" << res.distance
            << " switches=" << res.switches << " -> " << rc.out_dir << "\n";
  return 0;
}

bool any_crashed(const std::vector<MonteCarloEntry>& entries) {
  bool crashed = false;
  for (const MonteCarloEntry& e : entries) {
    for (std::size_t r = 0; r < e.trials.size(); ++r) {
      if (e.trials[r].crashed) {
        crashed = true;
        std::cerr << "trial crashed: " << e.label << " run " << r << ": " << e.trials[r].error
                  << "\n";
      }
    }
  }
  return crashed;
}

std::string breakdown_csv(const std::vector<MonteCarloEntry>& entries) {
  std::string csv =
      "label,runs,success_rate_pct,collision_intensity_pct,distance_m,homotopy_switches,"
      "compute_time_t0_s,compute_time_later_s\n";
  char buf[256];
  for (const MonteCarloEntry& e : entries) {
    const MetricsRow& m = e.metrics;
    std::snprintf(buf, sizeof(buf), "%s,%d,%.4f,%.4f,%.4f,%.4f,%.6f,%.6f\n", e.label.c_str(),
                  m.runs, m.success_rate_pct, m.collision_intensity_pct, m.mean_distance,
                  m.mean_switches, m.mean_t0_seconds, m.mean_later_step_seconds);
    csv += buf;
  }
  return csv;
}

// Pools the per-(group, environment) entries back into one entry per group,
// preserving group order. Jobs must be laid out group-major.
std::vector<MonteCarloEntry> pool_groups(std::vector<MonteCarloEntry> per_env,
                                         const std::vector<std::string>& group_labels,
                                         std::size_t envs_per_group) {
  std::vector<MonteCarloEntry> pooled;
  std::size_t idx = 0;
  for (const std::string& label : group_labels) {
    MonteCarloEntry e;
    e.label = label;
    for (std::size_t k = 0; k < envs_per_group; ++k, ++idx) {
      e.variant = per_env[idx].variant;
      for (TrialResult& t : per_env[idx].trials) e.trials.push_back(std::move(t));
    }
    e.metrics = aggregate(e.trials);
    pooled.push_back(std::move(e));
  }
  return pooled;
}

int run_bench(const CliOverrides& opts) {
  RunConfig rc = load_with_overrides(opts);
  if (rc.environments.empty()) throw std::runtime_error("no environments configured");

  std::vector<PlannerVariant> variants;
  if (!opts.variant.empty()) {
    variants = {parse_variant(opts.variant)};
  } else {
    variants = {PlannerVariant::Posh, PlannerVariant::GraphThenChain,
                PlannerVariant::SingleChain};
  }

  std::vector<MonteCarloJob> jobs;
  std::vector<std::string> group_labels;
  for (PlannerVariant v : variants) {
    group_labels.push_back(variant_name(v));
    for (const EnvironmentConfig& env : rc.environments) {
      MonteCarloJob job;
      job.label = variant_name(v) + ":" + env.name;
      job.config = rc.trial;
      job.config.environment = env;
      job.config.variant = v;
      jobs.push_back(std::move(job));
    }
  }

  auto per_env = run_monte_carlo(jobs, rc.runs, opts.jobs);
  const bool crashed = any_crashed(per_env);
  const std::string breakdown = breakdown_csv(per_env);
  auto pooled = pool_groups(std::move(per_env), group_labels, rc.environments.size());

  fs::create_directories(rc.out_dir);
  const fs::path out(rc.out_dir);
  write_file(out / "metrics.csv", metrics_csv(pooled, rc.timing_rows));
  write_file(out / "breakdown.csv", breakdown);
  const std::string table = metrics_text_table(pooled, rc.timing_rows);
  write_file(out / "metrics.txt", table);
  std::cout << table;
  return crashed ? 3 : 0;
}

int run_sweep(const CliOverrides& opts) {
  RunConfig rc = load_with_overrides(opts);
  if (rc.environments.empty()) throw std::runtime_error("no environments configured");
  if (rc.chain_counts.empty()) throw std::runtime_error("no chain counts configured");
  for (int c : rc.chain_counts) {
    if (c <= 0) throw std::runtime_error("chain counts must be positive");
  }

  std::vector<MonteCarloJob> jobs;
  std::vector<std::string> group_labels;
  for (int c : rc.chain_counts) {
    group_labels.push_back("N=" + std::to_string(c));
    for (const EnvironmentConfig& env : rc.environments) {
      MonteCarloJob job;
      job.label = "N=" + std::to_string(c) + ":" + env.name;
      job.config = rc.trial;
      job.config.environment = env;
      job.config.variant = PlannerVariant::Posh;
      job.config.builder.n_chains = c;
      jobs.push_back(std::move(job));
    }
  }

  auto per_env = run_monte_carlo(jobs, rc.runs, opts.jobs);
  const bool crashed = any_crashed(per_env);
  const std::string breakdown = breakdown_csv(per_env);
  auto pooled = pool_groups(std::move(per_env), group_labels, rc.environments.size());

  fs::create_directories(rc.out_dir);
  const fs::path out(rc.out_dir);
  write_file(out / "sweep.csv", metrics_csv(pooled, false));
  write_file(out / "breakdown.csv", breakdown);
  const std::string table = metrics_text_table(pooled, false);
  write_file(out / "sweep.txt", table);
  std::cout << table;
  return crashed ? 3 : 0;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int cmd_plan(const CliOverrides& opts) {
  return guarded([&] { return run_single_trial(opts, false); });
}

int cmd_render(const CliOverrides& opts) {
  return guarded([&] { return run_single_trial(opts, true); });
}

int cmd_bench(const CliOverrides& opts) {
  return guarded([&] { return run_bench(opts); });
}

int cmd_sweep_chains(const CliOverrides& opts) {
  return guarded([&] { return run_sweep(opts); });
}

}  // namespace posh
