#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "posh/config.hpp"
#include "posh/planner.hpp"

namespace posh {

struct StepRecord {
  int time_index{0};
  Vec2 true_position{Vec2::Zero()};
  Vec2 true_velocity{Vec2::Zero()};
  Vec2 measured_position{Vec2::Zero()};
  bool collision{false};
  double path_cost{0.0};
  int lm_iterations{0};
  double lm_initial_error{0.0};
  double lm_final_error{0.0};
  std::string signature;
  bool switched{false};
  double optimize_seconds{0.0};
  double step_seconds{0.0};
  std::vector<Vec2> planned;  // route positions at plan time, current first
  std::vector<std::pair<Vec2, Vec2>> pruned_segments;
  std::vector<std::pair<Vec2, Vec2>> graph_edges;  // surviving motion-prior edges
  std::vector<Obstacle> obstacles;  // world snapshot this step planned against
};

struct TrialResult {
  bool success{false};
  bool completed{false};        // all n steps executed
  bool planning_failed{false};
  bool crashed{false};          // run_trial threw; error holds the message
  std::string error;
  int collision_steps{0};
  int total_steps{0};
  double distance{0.0};
  int switches{0};
  double final_goal_distance{0.0};
  double t0_seconds{0.0};               // first plan_step wall time
  double later_steps_seconds{0.0};      // summed wall time of steps t > 0
  std::vector<Vec2> executed_path;      // true positions, start included
  std::vector<HSignature> per_step_signatures;
  std::vector<StepRecord> steps;
};

// Runs one closed-loop trial: plan, execute with noise, move the obstacles,
// refresh the field, repeat for n steps. All variants share this loop; they
// differ only in how the graph is built and collapsed.
TrialResult run_trial(const TrialConfig& config);

TrialResult baseline_single_chain(TrialConfig config);
TrialResult baseline_graph_then_chain(TrialConfig config);

struct MetricsRow {
  int runs{0};
  double success_rate_pct{0.0};
  double collision_intensity_pct{0.0};  // mean over runs with >= 1 collision
  double mean_distance{0.0};            // over completed runs
  double mean_switches{0.0};
  double mean_t0_seconds{0.0};
  double mean_later_step_seconds{0.0};  // pooled over all steps with t > 0
};

MetricsRow aggregate(const std::vector<TrialResult>& trials);

struct MonteCarloJob {
  std::string label;  // e.g. environment name or chain count
  TrialConfig config;
};

struct MonteCarloEntry {
  std::string label;
  PlannerVariant variant{PlannerVariant::Posh};
  MetricsRow metrics;
  std::vector<TrialResult> trials;  // ordered by run index
};

// Runs `n_runs` seeded trials per job (seeds derived from each job's seed and
// the run index) and aggregates in run order, so results do not depend on
// scheduling. `jobs` > 1 runs trials on a thread pool.
std::vector<MonteCarloEntry> run_monte_carlo(const std::vector<MonteCarloJob>& specs,
                                             int n_runs, int jobs = 1);

// Serialized trial result with timing fields stripped; equal strings mean
// equal results under the determinism contract.
std::string trial_fingerprint(const TrialResult& result);

// Metrics table with one column per entry, mirroring the benchmark layout.
std::string metrics_csv(const std::vector<MonteCarloEntry>& entries, bool timing_rows);
std::string metrics_text_table(const std::vector<MonteCarloEntry>& entries,
                               bool timing_rows);

}  // namespace posh
