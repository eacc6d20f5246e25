#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "posh/graph_builder.hpp"
#include "posh/planner.hpp"
#include "posh/rng.hpp"
#include "test_support.hpp"

using namespace posh;
namespace ts = posh::testsupport;

namespace {

struct RandomCase {
  Graph graph;
  SignedDistanceField sdf;
};

// Small multi-chain graph with jittered values and a random box field.
RandomCase random_case(RngStream& rng, int max_chains, int max_steps) {
  BuilderParams p;
  p.n_chains = 2 + static_cast<int>(rng.uniform01() * (max_chains - 1));
  p.n_steps = 3 + static_cast<int>(rng.uniform01() * (max_steps - 2));
  p.dt = 0.5;
  p.qc = rng.uniform(0.3, 1.5);
  p.interconnection_ratio = rng.uniform01() < 0.5 ? 1.0 : 0.5;
  p.interconnection_qc = rng.uniform(0.5, 2.0);
  p.b_max = rng.uniform(1.0, 3.0);
  p.n_interp = static_cast<int>(rng.uniform01() * 3.0);
  p.eps = 0.8;
  p.sigma_obs = 0.2;
  p.r_robot = 0.3;

  const SupportState start(rng.uniform(1, 3), rng.uniform(1, 3), 0, 0);
  const SupportState goal(rng.uniform(7, 9), rng.uniform(7, 9), 0, 0);
  Graph graph = interconnect(build_chains(start, goal, p), p);
  for (const auto& [id, value] : graph.variables()) {
    Vec4 v = value;
    v(0) += rng.gauss(0.4);
    v(1) += rng.gauss(0.4);
    graph.set_value(id, v);
  }

  GridSpec spec;
  spec.origin = Vec2(0.0, 0.0);
  spec.cell_size = 0.25;
  spec.dims = Eigen::Vector2i(48, 48);
  std::vector<Obstacle> boxes;
  const int n_boxes = static_cast<int>(rng.uniform01() * 3.0);
  for (int i = 0; i < n_boxes; ++i) {
    boxes.push_back(ts::make_box(i + 1, rng.uniform(3, 8), rng.uniform(3, 8),
                                 rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0)));
  }
  return {std::move(graph), compute_sdf(boxes, spec)};
}

}  // namespace

TEST_CASE("edge cost decomposes into prior, interpolated, and endpoint clearance") {
  GridSpec spec;
  spec.origin = Vec2(0.0, 0.0);
  spec.cell_size = 0.1;
  spec.dims = Eigen::Vector2i(100, 100);
  const SignedDistanceField sdf = compute_sdf({ts::make_box(1, 5.0, 5.0, 1.0, 1.0)}, spec);

  Graph graph(1, 0.5);
  Vec4 a, b;
  a << 3.4, 5.0, 1.0, 0.0;
  b << 6.6, 5.2, 1.0, 0.0;
  graph.add_variable({1, 0}, a);
  graph.add_variable({1, 1}, b);
  Factor gp;
  gp.kind = FactorKind::GpPrior;
  gp.a = {1, 0};
  gp.b = {1, 1};
  gp.params = GpPriorParams{0.5, 0.7};
  graph.add_factor(gp);
  Factor interp;
  interp.kind = FactorKind::InterpolatedObstacle;
  interp.a = {1, 0};
  interp.b = {1, 1};
  interp.params = InterpObstacleParams{0.5, 0.7, {0.125, 0.25, 0.375}, 0.8, 0.1, 0.4};
  graph.add_factor(interp);
  Factor obs_a;
  obs_a.kind = FactorKind::Obstacle;
  obs_a.a = {1, 0};
  obs_a.params = ObstacleParams{0.8, 0.1, 0.4};
  graph.add_factor(obs_a);
  Factor obs_b = obs_a;
  obs_b.a = {1, 1};
  graph.add_factor(obs_b);

  const double expected = factor_error(graph, gp, sdf) +
                          factor_error(graph, interp, sdf) +
                          factor_error(graph, obs_b, sdf);
  CHECK(edge_cost(graph, sdf, {1, 0}, {1, 1}) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("search result equals exhaustive enumeration on random graphs") {
  RngStream rng(81);
  int verified = 0;
  int attempts = 0;
  while (verified < 50 && attempts < 300) {
    ++attempts;
    RandomCase rc = random_case(rng, 3, 6);
    const VariableId start = rc.graph.start_id();
    const VariableId goal = rc.graph.goal_id();
    const auto all = ts::enumerate_paths(rc.graph, rc.sdf, start, goal, 200);
    if (!all || all->empty()) continue;

    const auto best = extract_best_path(rc.graph, rc.sdf, start, goal);
    REQUIRE(best.has_value());

    // Exact minimum over the full enumeration (identical accumulation order).
    double min_cost = all->front().cost;
    for (const auto& ep : *all) min_cost = std::min(min_cost, ep.cost);
    CHECK(best->cost == min_cost);

    // Tie-break: lexicographically smallest among the exact-cost ties.
    std::vector<VariableId> smallest;
    for (const auto& ep : *all) {
      if (ep.cost == min_cost && (smallest.empty() || ep.path < smallest)) {
        smallest = ep.path;
      }
    }
    CHECK(best->path == smallest);
    CHECK(best->path.front() == start);
    CHECK(best->path.back() == goal);
    ++verified;
  }
  CHECK(verified == 50);
}

TEST_CASE("search reports unreachable goals") {
  Graph graph(2, 0.5);
  Vec4 z = Vec4::Zero();
  graph.add_variable({0, 0}, z);
  graph.add_variable({0, 2}, z);
  graph.add_variable({1, 1}, z);
  Factor f;
  f.kind = FactorKind::GpPrior;
  f.a = {0, 0};
  f.b = {1, 1};
  f.params = GpPriorParams{};
  graph.add_factor(f);  // dead end: nothing reaches the goal
  const SignedDistanceField sdf = ts::empty_sdf(10.0, 0.5);
  CHECK_FALSE(extract_best_path(graph, sdf, {0, 0}, {0, 2}).has_value());
  CHECK_FALSE(extract_best_path(graph, sdf, {9, 9}, {0, 2}).has_value());
}

TEST_CASE("pruning keeps exactly the forward transitive closure") {
  RngStream rng(82);
  for (int trial = 0; trial < 50; ++trial) {
    RandomCase rc = random_case(rng, 4, 7);

    // Knock out a random subset of interior variables to make the
    // reachability structure ragged.
    std::set<VariableId> doomed;
    for (const auto& [id, value] : rc.graph.variables()) {
      if (id == rc.graph.start_id() || id == rc.graph.goal_id()) continue;
      if (rng.uniform01() < 0.2) doomed.insert(id);
    }
    rc.graph.remove_variables(doomed);

    // Random surviving source.
    std::vector<VariableId> ids;
    for (const auto& [id, value] : rc.graph.variables()) ids.push_back(id);
    const VariableId next = ids[static_cast<std::size_t>(rng.uniform01() * ids.size())];

    const std::set<VariableId> expected = ts::brute_force_reachable(rc.graph, next);
    const Graph pruned = prune_unreachable(rc.graph, next);

    std::set<VariableId> kept;
    for (const auto& [id, value] : pruned.variables()) {
      kept.insert(id);
      // Survivor values are untouched.
      CHECK((value - rc.graph.value(id)).norm() == 0.0);
    }
    CHECK(kept == expected);

    // Factors: every kept factor touches only survivors, and every original
    // factor among survivors is retained.
    std::size_t expected_factors = 0;
    for (const Factor& f : rc.graph.factors()) {
      const bool a_in = expected.count(f.a) != 0;
      const bool b_in = !f.binary() || expected.count(f.b) != 0;
      if (a_in && b_in) ++expected_factors;
    }
    CHECK(pruned.factors().size() == expected_factors);
    for (const Factor& f : pruned.factors()) {
      CHECK(expected.count(f.a) == 1);
      if (f.binary()) CHECK(expected.count(f.b) == 1);
    }
  }
}

TEST_CASE("pruning rejects unknown sources") {
  RngStream rng(83);
  RandomCase rc = random_case(rng, 2, 4);
  CHECK_THROWS_AS(prune_unreachable(rc.graph, {9, 9}), std::invalid_argument);
}

TEST_CASE("closed-loop stepping walks the graph to the goal") {
  BuilderParams p;
  p.n_chains = 3;
  p.n_steps = 8;
  p.dt = 0.5;
  p.qc = 0.5;
  p.b_max = 2.0;
  p.n_interp = 2;
  const SupportState start(2, 2, 0, 0);
  const SupportState goal(10, 10, 0, 0);
  Graph graph = interconnect(build_chains(start, goal, p), p);
  const SignedDistanceField sdf = ts::empty_sdf(20.0, 0.25);

  Planner planner(std::move(graph), LmParams{}, 1e6);
  CHECK(planner.current() == VariableId{0, 0});

  SupportState measured = start;
  int steps = 0;
  while (!planner.at_goal() && steps < 20) {
    const VariableId at = planner.current();
    StepDiagnostics diag;
    const auto next = planner.plan_step(sdf, {}, measured, &diag);
    REQUIRE(next.has_value());
    CHECK(diag.failed == false);
    CHECK(diag.time_index == steps);
    CHECK(std::isfinite(diag.path_cost));
    CHECK(diag.best_path.size() >= 2);
    CHECK(diag.best_path.front() == at);
    CHECK(diag.best_path.back() == VariableId{0, p.n_steps});
    CHECK(diag.best_path_positions.size() == diag.best_path.size());
    // After the final hop only the goal variable survives pruning, so no
    // motion-prior edges are left to report.
    if (steps < p.n_steps - 1) CHECK(!diag.graph_edges.empty());
    measured = *next;  // perfect execution
    ++steps;
  }
  CHECK(planner.at_goal());
  CHECK(steps == p.n_steps);
  CHECK(planner.executed_positions().size() == static_cast<std::size_t>(p.n_steps));
  // Ends essentially at the goal: the final hop lands on the anchored state.
  CHECK((measured.position - goal.position).norm() < 0.5);

  // Once at the goal there is nothing to plan.
  StepDiagnostics diag;
  CHECK_FALSE(planner.plan_step(sdf, {}, measured, &diag).has_value());
  CHECK(diag.failed);
}

TEST_CASE("measurements steer the re-anchored trajectory") {
  BuilderParams p;
  p.n_chains = 2;
  p.n_steps = 6;
  p.dt = 0.5;
  p.qc = 0.5;
  p.b_max = 1.5;
  p.n_interp = 0;
  const SupportState start(2, 2, 0, 0);
  const SupportState goal(8, 8, 0, 0);
  const SignedDistanceField sdf = ts::empty_sdf(20.0, 0.25);

  Planner on_track(interconnect(build_chains(start, goal, p), p), LmParams{}, 1e6);
  Planner dragged(interconnect(build_chains(start, goal, p), p), LmParams{}, 1e6);

  const auto next_a = on_track.plan_step(sdf, {}, start);
  const SupportState shifted(start.position + Vec2(0.0, 1.5), start.velocity);
  const auto next_b = dragged.plan_step(sdf, {}, shifted);
  REQUIRE(next_a.has_value());
  REQUIRE(next_b.has_value());
  // The dragged plan leaves from the measured position, so its next state
  // sits closer to the shifted start than the nominal plan's next state.
  CHECK((next_b->position - shifted.position).norm() <
        (next_a->position - shifted.position).norm());
  CHECK(next_b->position.y() > next_a->position.y());
}

TEST_CASE("collapse-at-first-step reduces the graph to the chosen chain") {
  BuilderParams p;
  p.n_chains = 4;
  p.n_steps = 7;
  p.dt = 0.5;
  p.qc = 0.5;
  p.b_max = 2.5;
  p.n_interp = 1;
  const SupportState start(2, 2, 0, 0);
  const SupportState goal(10, 10, 0, 0);
  const SignedDistanceField sdf = ts::empty_sdf(20.0, 0.25);

  Planner planner(interconnect(build_chains(start, goal, p), p), LmParams{}, 1e6,
                  /*collapse_to_path_at_first_step=*/true);
  const auto next = planner.plan_step(sdf, {}, start);
  REQUIRE(next.has_value());

  // After collapsing and pruning, one state per remaining time index.
  const Graph& g = planner.graph();
  CHECK(g.variable_count() == static_cast<std::size_t>(p.n_steps));
  std::set<int> times;
  for (const auto& [id, value] : g.variables()) times.insert(id.time_index);
  CHECK(times.size() == g.variable_count());

  // Later steps keep following that single chain.
  SupportState measured = *next;
  while (!planner.at_goal()) {
    const auto step = planner.plan_step(sdf, {}, measured);
    REQUIRE(step.has_value());
    measured = *step;
  }
  CHECK((measured.position - goal.position).norm() < 0.5);
}

TEST_CASE("pruning during stepping discards states behind the robot") {
  BuilderParams p;
  p.n_chains = 2;
  p.n_steps = 5;
  p.dt = 0.5;
  p.qc = 0.5;
  p.b_max = 1.5;
  p.n_interp = 0;
  const SupportState start(2, 2, 0, 0);
  const SupportState goal(8, 8, 0, 0);
  const SignedDistanceField sdf = ts::empty_sdf(20.0, 0.25);

  Planner planner(interconnect(build_chains(start, goal, p), p), LmParams{}, 1e6);
  StepDiagnostics diag;
  const auto next = planner.plan_step(sdf, {}, start, &diag);
  REQUIRE(next.has_value());
  CHECK(planner.time_index() == 1);
  // The start variable is behind the robot now.
  CHECK_FALSE(planner.graph().has_variable(VariableId{0, 0}));
  // No kept variable sits at time 0.
  for (const auto& [id, value] : planner.graph().variables()) {
    CHECK(id.time_index >= 1);
  }
}
