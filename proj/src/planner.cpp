#include "posh/planner.hpp"

#include <algorithm>
#include <chrono>
#include <queue>
#include <set>

namespace posh {

namespace {

// Forward adjacency over GpPrior edges, plus per-edge / per-variable factor
// lookups used by the search.
struct EdgeIndex {
  std::map<VariableId, std::vector<VariableId>> forward;
  std::map<std::pair<VariableId, VariableId>, std::vector<const Factor*>> edge_factors;
  std::map<VariableId, const Factor*> clearance;

  explicit EdgeIndex(const Graph& graph) {
    for (const Factor& f : graph.factors()) {
      switch (f.kind) {
        case FactorKind::GpPrior:
          forward[f.a].push_back(f.b);
          edge_factors[{f.a, f.b}].push_back(&f);
          break;
        case FactorKind::InterpolatedObstacle:
          edge_factors[{f.a, f.b}].push_back(&f);
          break;
        case FactorKind::Obstacle:
          clearance[f.a] = &f;
          break;
        case FactorKind::Anchor:
          break;
      }
    }
    for (auto& [id, next] : forward) {
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
    }
  }
};

double clearance_cost(const Graph& graph, const SignedDistanceField& sdf,
                      const EdgeIndex& index, VariableId id) {
  auto it = index.clearance.find(id);
  return it == index.clearance.end() ? 0.0 : factor_error(graph, *it->second, sdf);
}

double edge_cost_indexed(const Graph& graph, const SignedDistanceField& sdf,
                         const EdgeIndex& index, VariableId a, VariableId b) {
  double cost = 0.0;
  auto it = index.edge_factors.find({a, b});
  if (it != index.edge_factors.end()) {
    for (const Factor* f : it->second) cost += factor_error(graph, *f, sdf);
  }
  cost += clearance_cost(graph, sdf, index, b);
  return cost;
}

}  // namespace

double edge_cost(const Graph& graph, const SignedDistanceField& sdf, VariableId a,
                 VariableId b) {
  return edge_cost_indexed(graph, sdf, EdgeIndex(graph), a, b);
}

std::optional<PathResult> extract_best_path(const Graph& graph,
                                            const SignedDistanceField& sdf,
                                            VariableId current, VariableId goal) {
  if (!graph.has_variable(current) || !graph.has_variable(goal)) return std::nullopt;
  const EdgeIndex index(graph);

  struct Entry {
    double cost;
    std::vector<VariableId> path;
  };
  // Pop order (cost, lexicographic path) settles each node with its cheapest,
  // lexicographically smallest path; edges never go backward in time, so
  // zero-cost edges cannot cycle.
  auto later = [](const Entry& a, const Entry& b) {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.path > b.path;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(later)> open(later);
  std::set<VariableId> settled;

  open.push({clearance_cost(graph, sdf, index, current), {current}});
  while (!open.empty()) {
    Entry top = open.top();
    open.pop();
    const VariableId node = top.path.back();
    if (!settled.insert(node).second) continue;
    if (node == goal) return PathResult{std::move(top.path), top.cost};
    auto adj = index.forward.find(node);
    if (adj == index.forward.end()) continue;
    for (VariableId next : adj->second) {
      if (settled.count(next)) continue;
      Entry e;
      e.cost = top.cost + edge_cost_indexed(graph, sdf, index, node, next);
      e.path = top.path;
      e.path.push_back(next);
      open.push(std::move(e));
    }
  }
  return std::nullopt;
}

Graph prune_unreachable(Graph graph, VariableId next) {
  if (!graph.has_variable(next)) {
    throw std::invalid_argument("prune_unreachable: unknown variable");
  }
  std::map<VariableId, std::vector<VariableId>> forward;
  for (const Factor& f : graph.factors()) {
    if (f.kind == FactorKind::GpPrior) forward[f.a].push_back(f.b);
  }
  std::set<VariableId> reachable{next};
  std::vector<VariableId> stack{next};
  while (!stack.empty()) {
    VariableId v = stack.back();
    stack.pop_back();
    auto it = forward.find(v);
    if (it == forward.end()) continue;
    for (VariableId w : it->second) {
      if (reachable.insert(w).second) stack.push_back(w);
    }
  }
  std::set<VariableId> doomed;
  for (const auto& [id, value] : graph.variables()) {
    if (!reachable.count(id)) doomed.insert(id);
  }
  graph.remove_variables(doomed);
  return graph;
}

Planner::Planner(Graph graph, LmParams lm, double anchor_precision,
                 bool collapse_to_path_at_first_step)
    : graph_(std::move(graph)),
      lm_(lm),
      anchor_precision_(anchor_precision),
      collapse_to_path_at_first_step_(collapse_to_path_at_first_step),
      current_(graph_.start_id()) {}

std::optional<SupportState> Planner::plan_step(const SignedDistanceField& sdf,
                                               const std::vector<Obstacle>& obstacles,
                                               const SupportState& measured,
                                               StepDiagnostics* diag) {
  using clock = std::chrono::steady_clock;
  const auto t_begin = clock::now();
  if (diag) {
    *diag = StepDiagnostics{};
    diag->time_index = time_index_;
  }
  auto fail = [&]() -> std::optional<SupportState> {
    if (diag) diag->failed = true;
    return std::nullopt;
  };
  if (at_goal()) return fail();

  // (1) pin the current variable to the measurement
  graph_.set_value(current_, measured.vector());
  graph_.set_anchor(current_, measured.vector(), anchor_precision_);
  executed_positions_.push_back(measured.position);

  // (2) reoptimize against the current field
  LmStats lm = optimize(graph_, sdf, lm_);
  const auto t_opt = clock::now();

  // (3) lowest-cost route to the goal
  auto best = extract_best_path(graph_, sdf, current_, graph_.goal_id());
  if (!best || best->path.size() < 2) return fail();
  best_path_ = best->path;
  if (diag) {
    diag->best_path_positions.reserve(best_path_.size());
    for (const VariableId& id : best_path_) {
      diag->best_path_positions.push_back(graph_.value(id).head<2>());
    }
  }

  if (collapse_to_path_at_first_step_ && time_index_ == 0) {
    // keep only the chosen route; from here on this behaves as one chain
    std::set<VariableId> keep(best_path_.begin(), best_path_.end());
    std::set<VariableId> doomed;
    for (const auto& [id, value] : graph_.variables()) {
      if (!keep.count(id)) doomed.insert(id);
    }
    graph_.remove_variables(doomed);
  }

  // (4) drop states that can no longer be reached in time
  const VariableId next = best_path_[1];
  if (diag) {
    Graph pruned = prune_unreachable(graph_, next);
    for (const Factor& f : graph_.factors()) {
      if (f.kind != FactorKind::GpPrior) continue;
      if (!pruned.has_variable(f.a) || !pruned.has_variable(f.b)) {
        diag->pruned_segments.emplace_back(graph_.value(f.a).head<2>(),
                                           graph_.value(f.b).head<2>());
      }
    }
    graph_ = std::move(pruned);
    for (const Factor& f : graph_.factors()) {
      if (f.kind != FactorKind::GpPrior) continue;
      diag->graph_edges.emplace_back(graph_.value(f.a).head<2>(),
                                     graph_.value(f.b).head<2>());
    }
  } else {
    graph_ = prune_unreachable(graph_, next);
  }

  // Signature of executed prefix + planned remainder against this step's
  // obstacle snapshot.
  std::vector<Vec2> full_path = executed_positions_;
  for (std::size_t i = 1; i < best_path_.size(); ++i) {
    full_path.push_back(graph_.value(best_path_[i]).head<2>());
  }
  HSignature sig = signature(full_path, obstacles);
  const bool switched = time_index_ > 0 && !(sig == last_signature_);
  last_signature_ = std::move(sig);

  current_ = next;
  time_index_ += 1;
  const SupportState next_state = SupportState::from_vector(graph_.value(next));

  if (diag) {
    diag->path_cost = best->cost;
    diag->lm = std::move(lm);
    diag->signature = last_signature_;
    diag->signature_string = to_string(last_signature_);
    diag->switched = switched;
    diag->best_path = best_path_;
    diag->optimize_seconds = std::chrono::duration<double>(t_opt - t_begin).count();
    diag->step_seconds = std::chrono::duration<double>(clock::now() - t_begin).count();
  }
  return next_state;
}

}  // namespace posh
