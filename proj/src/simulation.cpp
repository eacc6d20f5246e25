#include "posh/simulation.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

namespace posh {

namespace {

// Purpose tags for derived random streams.
constexpr std::uint64_t kStreamObstacles = 1;
constexpr std::uint64_t kStreamExecution = 2;
constexpr std::uint64_t kStreamLocalization = 3;

BuilderParams builder_for_variant(const TrialConfig& config) {
  BuilderParams b = config.builder;
  b.r_robot = config.environment.robot_radius;
  if (config.variant == PlannerVariant::SingleChain) {
    b.n_chains = 1;
    b.interconnection_ratio = 0.0;
  }
  return b;
}

WorldState step_world(const WorldState& world, const EnvironmentConfig& env, double dt,
                      RngStream& rng) {
  switch (env.model) {
    case WorldModel::NarrowPassage:
      return step_obstacles_narrow_passage(world, env.motion(dt));
    case WorldModel::Forest:
      return step_obstacles_forest(world, env.motion(dt), rng);
    case WorldModel::Static: {
      WorldState out = world;
      out.time_index = world.time_index + 1;
      return out;
    }
  }
  return world;
}

// True clearance violation anywhere along the executed segment: the endpoint
// plus four evenly spaced interior points.
bool segment_collides(const SignedDistanceField& sdf, const Vec2& from, const Vec2& to,
                      double r_robot) {
  for (int k = 1; k <= 5; ++k) {
    const double t = k / 5.0;
    const Vec2 p = from + t * (to - from);
    if (sdf_query(sdf, p).distance - r_robot < 0.0) return true;
  }
  return false;
}

}  // namespace

TrialResult run_trial(const TrialConfig& config) {
  const EnvironmentConfig& env = config.environment;
  env.validate();
  const BuilderParams builder = builder_for_variant(config);

  TrialResult result;
  RngStream rng_obstacles = derive_stream(config.seed, 0, kStreamObstacles);
  RngStream rng_exec = derive_stream(config.seed, 0, kStreamExecution);
  RngStream rng_loc = derive_stream(config.seed, 0, kStreamLocalization);

  WorldState world;
  world.obstacles = env.obstacles;
  world.robot_true = config.start;
  SignedDistanceField sdf = compute_sdf(world.obstacles, env.grid());

  Graph graph = build_chains(config.start, config.goal, builder);
  if (config.variant != PlannerVariant::SingleChain) {
    graph = interconnect(std::move(graph), builder);
  }
  Planner planner(std::move(graph), config.lm, builder.anchor_precision,
                  config.variant == PlannerVariant::GraphThenChain);

  SupportState true_state = config.start;
  result.executed_path.push_back(true_state.position);

  const int n = builder.n_steps;
  for (int t = 0; t < n; ++t) {
    SupportState measured = true_state;
    measured.position.x() += rng_loc.gauss(config.noise.sigma_loc);
    measured.position.y() += rng_loc.gauss(config.noise.sigma_loc);

    StepDiagnostics diag;
    auto next = planner.plan_step(sdf, world.obstacles, measured, &diag);
    if (!next) {
      result.planning_failed = true;
      break;
    }

    SupportState new_true;
    new_true.position.x() = next->position.x() + rng_exec.gauss(config.noise.sigma_exec);
    new_true.position.y() = next->position.y() + rng_exec.gauss(config.noise.sigma_exec);
    new_true.velocity = next->velocity;  // velocity carried from the plan

    const bool collided =
        segment_collides(sdf, true_state.position, new_true.position, env.robot_radius);
    if (collided) ++result.collision_steps;
    result.distance += (new_true.position - true_state.position).norm();
    ++result.total_steps;
    if (t == 0) {
      result.t0_seconds = diag.step_seconds;
    } else {
      result.later_steps_seconds += diag.step_seconds;
    }

    result.executed_path.push_back(new_true.position);
    result.per_step_signatures.push_back(diag.signature);

    if (config.record_steps) {
      StepRecord rec;
      rec.time_index = t;
      rec.true_position = new_true.position;
      rec.true_velocity = new_true.velocity;
      rec.measured_position = measured.position;
      rec.collision = collided;
      rec.path_cost = diag.path_cost;
      rec.lm_iterations = diag.lm.iterations;
      rec.lm_initial_error = diag.lm.initial_error;
      rec.lm_final_error = diag.lm.final_error;
      rec.signature = diag.signature_string;
      rec.switched = diag.switched;
      rec.optimize_seconds = diag.optimize_seconds;
      rec.step_seconds = diag.step_seconds;
      rec.planned = std::move(diag.best_path_positions);
      rec.pruned_segments = std::move(diag.pruned_segments);
      rec.graph_edges = std::move(diag.graph_edges);
      rec.obstacles = world.obstacles;
      result.steps.push_back(std::move(rec));
    }

    true_state = new_true;
    world.robot_true = true_state;
    world = step_world(world, env, builder.dt, rng_obstacles);
    sdf = compute_sdf(world.obstacles, env.grid());
  }

  result.completed = result.total_steps == n;
  result.switches = count_switches(result.per_step_signatures);
  result.final_goal_distance = (true_state.position - config.goal.position).norm();
  result.success = result.completed && result.collision_steps == 0 &&
                   result.final_goal_distance <= config.goal_tolerance;
  return result;
}

TrialResult baseline_single_chain(TrialConfig config) {
  config.variant = PlannerVariant::SingleChain;
  return run_trial(config);
}

TrialResult baseline_graph_then_chain(TrialConfig config) {
  config.variant = PlannerVariant::GraphThenChain;
  return run_trial(config);
}

MetricsRow aggregate(const std::vector<TrialResult>& trials) {
  MetricsRow row;
  row.runs = static_cast<int>(trials.size());
  if (trials.empty()) return row;

  int successes = 0;
  int collided_runs = 0;
  double intensity_sum = 0.0;
  int completed_runs = 0;
  double distance_sum = 0.0;
  double switches_sum = 0.0;
  double t0_sum = 0.0;
  double later_sum = 0.0;
  long later_steps = 0;

  for (const TrialResult& t : trials) {
    successes += t.success ? 1 : 0;
    if (t.collision_steps > 0 && t.total_steps > 0) {
      ++collided_runs;
      intensity_sum += 100.0 * t.collision_steps / t.total_steps;
    }
    if (t.completed) {
      ++completed_runs;
      distance_sum += t.distance;
    }
    switches_sum += t.switches;
    if (t.total_steps > 0) {
      t0_sum += t.t0_seconds;
      later_sum += t.later_steps_seconds;
      later_steps += t.total_steps - 1;
    }
  }

  row.success_rate_pct = 100.0 * successes / row.runs;
  row.collision_intensity_pct = collided_runs > 0 ? intensity_sum / collided_runs : 0.0;
  row.mean_distance = completed_runs > 0 ? distance_sum / completed_runs : 0.0;
  row.mean_switches = switches_sum / row.runs;
  row.mean_t0_seconds = t0_sum / row.runs;
  row.mean_later_step_seconds = later_steps > 0 ? later_sum / later_steps : 0.0;
  return row;
}

std::vector<MonteCarloEntry> run_monte_carlo(const std::vector<MonteCarloJob>& specs,
                                             int n_runs, int jobs) {
  struct Task {
    std::size_t spec_index;
    int run_index;
  };
  std::vector<Task> tasks;
  tasks.reserve(specs.size() * n_runs);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (int r = 0; r < n_runs; ++r) tasks.push_back({s, r});
  }

  // Results land in fixed slots and are reduced in run order afterwards, so
  // the aggregate is independent of scheduling.
  std::vector<std::vector<TrialResult>> results(specs.size(),
                                                std::vector<TrialResult>(n_runs));
  auto run_task = [&](const Task& task) {
    TrialConfig config = specs[task.spec_index].config;
    config.seed = mix_seed(config.seed, static_cast<std::uint64_t>(task.run_index));
    config.record_steps = false;
    TrialResult& slot = results[task.spec_index][task.run_index];
    try {
      slot = run_trial(config);
    } catch (const std::exception& e) {
      slot = TrialResult{};
      slot.crashed = true;
      slot.error = e.what();
    }
  };

  const int workers = std::max(1, jobs);
  if (workers == 1) {
    for (const Task& task : tasks) run_task(task);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= tasks.size()) return;
          run_task(tasks[i]);
        }
      });
    }
    for (std::thread& th : pool) th.join();
  }

  std::vector<MonteCarloEntry> entries;
  entries.reserve(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    MonteCarloEntry e;
    e.label = specs[s].label;
    e.variant = specs[s].config.variant;
    e.metrics = aggregate(results[s]);
    e.trials = std::move(results[s]);
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string trial_fingerprint(const TrialResult& result) {
  nlohmann::json j;
  j["success"] = result.success;
  j["completed"] = result.completed;
  j["planning_failed"] = result.planning_failed;
  j["crashed"] = result.crashed;
  j["error"] = result.error;
  j["collision_steps"] = result.collision_steps;
  j["total_steps"] = result.total_steps;
  j["distance"] = result.distance;
  j["switches"] = result.switches;
  j["final_goal_distance"] = result.final_goal_distance;
  nlohmann::json path = nlohmann::json::array();
  for (const Vec2& p : result.executed_path) path.push_back({p.x(), p.y()});
  j["executed_path"] = std::move(path);
  nlohmann::json sigs = nlohmann::json::array();
  for (const HSignature& s : result.per_step_signatures) sigs.push_back(to_string(s));
  j["signatures"] = std::move(sigs);
  return j.dump();
}

namespace {

std::string format_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

struct MetricSpec {
  const char* name;
  double (*get)(const MetricsRow&);
};

const MetricSpec kMetricSpecs[] = {
    {"success_rate_pct", [](const MetricsRow& r) { return r.success_rate_pct; }},
    {"collision_intensity_pct",
     [](const MetricsRow& r) { return r.collision_intensity_pct; }},
    {"distance_m", [](const MetricsRow& r) { return r.mean_distance; }},
    {"homotopy_switches", [](const MetricsRow& r) { return r.mean_switches; }},
};

const MetricSpec kTimingSpecs[] = {
    {"compute_time_t0_s", [](const MetricsRow& r) { return r.mean_t0_seconds; }},
    {"compute_time_later_s",
     [](const MetricsRow& r) { return r.mean_later_step_seconds; }},
};

}  // namespace

std::string metrics_csv(const std::vector<MonteCarloEntry>& entries, bool timing_rows) {
  std::ostringstream out;
  out << "metric";
  for (const MonteCarloEntry& e : entries) out << ',' << e.label;
  out << '\n';
  auto emit = [&](const MetricSpec& spec) {
    out << spec.name;
    for (const MonteCarloEntry& e : entries) out << ',' << format_metric(spec.get(e.metrics));
    out << '\n';
  };
  for (const MetricSpec& spec : kMetricSpecs) emit(spec);
  if (timing_rows) {
    for (const MetricSpec& spec : kTimingSpecs) emit(spec);
  }
  return out.str();
}

std::string metrics_text_table(const std::vector<MonteCarloEntry>& entries,
                               bool timing_rows) {
  std::ostringstream out;
  const int name_w = 26;
  const int col_w = 20;
  out << std::string(name_w, ' ');
  for (const MonteCarloEntry& e : entries) {
    std::string label = e.label;
    if (label.size() > static_cast<std::size_t>(col_w - 2)) label.resize(col_w - 2);
    out << std::string(col_w - label.size(), ' ') << label;
  }
  out << '\n';
  auto emit = [&](const MetricSpec& spec) {
    std::string name = spec.name;
    out << name << std::string(name_w - name.size(), ' ');
    for (const MonteCarloEntry& e : entries) {
      const std::string v = format_metric(spec.get(e.metrics));
      out << std::string(col_w - v.size(), ' ') << v;
    }
    out << '\n';
  };
  for (const MetricSpec& spec : kMetricSpecs) emit(spec);
  if (timing_rows) {
    for (const MetricSpec& spec : kTimingSpecs) emit(spec);
  }
  return out.str();
}

}  // namespace posh
