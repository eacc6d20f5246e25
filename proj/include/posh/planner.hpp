#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "posh/factor_graph.hpp"
#include "posh/homotopy.hpp"
#include "posh/optimizer.hpp"

namespace posh {

// Cost of traversing the GpPrior edge (a -> b) at the graph's current values:
// the motion prior deviation, interpolated clearance penalties on the edge,
// and the clearance penalty at the destination.
double edge_cost(const Graph& graph, const SignedDistanceField& sdf, VariableId a,
                 VariableId b);

struct PathResult {
  std::vector<VariableId> path;  // current ... goal
  double cost{0.0};
};

// Minimum-cost time-forward path from `current` to `goal` (uniform-cost
// search; the zero heuristic keeps it exact). Equal-cost candidates resolve
// to the lexicographically smallest (chain, time) sequence. Returns nullopt
// when the goal is unreachable.
std::optional<PathResult> extract_best_path(const Graph& graph,
                                            const SignedDistanceField& sdf,
                                            VariableId current, VariableId goal);

// Keeps exactly the variables reachable from `next` along forward GpPrior
// edges (and all factors among them). Values of survivors are untouched.
Graph prune_unreachable(Graph graph, VariableId next);

struct StepDiagnostics {
  int time_index{0};
  double path_cost{0.0};
  LmStats lm;
  HSignature signature;
  std::string signature_string;
  bool switched{false};
  bool failed{false};
  double optimize_seconds{0.0};
  double step_seconds{0.0};
  std::vector<VariableId> best_path;
  std::vector<Vec2> best_path_positions;  // values along best_path after optimizing
  // segments dropped by this step's pruning and those kept, for rendering
  std::vector<std::pair<Vec2, Vec2>> pruned_segments;
  std::vector<std::pair<Vec2, Vec2>> graph_edges;
};

// Receding-horizon executor over the multi-chain graph. Each plan_step:
// re-anchor the current variable to the measurement, reoptimize, pick the
// best path, prune states no longer reachable in time, and hand back the
// next state to execute.
class Planner {
 public:
  Planner(Graph graph, LmParams lm, double anchor_precision,
          bool collapse_to_path_at_first_step = false);

  const Graph& graph() const { return graph_; }
  VariableId current() const { return current_; }
  int time_index() const { return time_index_; }
  bool at_goal() const { return current_ == graph_.goal_id(); }
  const std::vector<VariableId>& best_path() const { return best_path_; }
  const std::vector<Vec2>& executed_positions() const { return executed_positions_; }

  std::optional<SupportState> plan_step(const SignedDistanceField& sdf,
                                        const std::vector<Obstacle>& obstacles,
                                        const SupportState& measured,
                                        StepDiagnostics* diag = nullptr);

 private:
  Graph graph_;
  LmParams lm_;
  double anchor_precision_;
  bool collapse_to_path_at_first_step_;
  VariableId current_;
  int time_index_{0};
  std::vector<VariableId> best_path_;
  HSignature last_signature_;
  std::vector<Vec2> executed_positions_;
};

}  // namespace posh
