#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "posh/factor_graph.hpp"
#include "posh/rng.hpp"
#include "test_support.hpp"

using namespace posh;
namespace ts = posh::testsupport;

namespace {

// A field with a single box in a large grid: smooth away from the box faces.
SignedDistanceField box_field() {
  GridSpec spec;
  spec.origin = Vec2(0.0, 0.0);
  spec.cell_size = 0.1;
  spec.dims = Eigen::Vector2i(100, 100);
  return compute_sdf({ts::make_box(1, 5.0, 5.0, 1.0, 1.0)}, spec);
}

Graph random_mixed_graph(RngStream& rng, int n_chains, int n_steps) {
  Graph graph(n_steps, 0.5);
  for (int c = 1; c <= n_chains; ++c) {
    for (int i = 0; i <= n_steps; ++i) {
      Vec4 v;
      v << rng.uniform(1.0, 9.0), rng.uniform(1.0, 9.0), rng.uniform(-1, 1),
          rng.uniform(-1, 1);
      graph.add_variable({c, i}, v);
    }
  }
  for (int c = 1; c <= n_chains; ++c) {
    for (int i = 0; i < n_steps; ++i) {
      Factor f;
      f.kind = FactorKind::GpPrior;
      f.a = {c, i};
      f.b = {c, i + 1};
      f.params = GpPriorParams{0.5, rng.uniform(0.2, 2.0)};
      graph.add_factor(f);
      if (i % 2 == 0) {
        Factor interp;
        interp.kind = FactorKind::InterpolatedObstacle;
        interp.a = {c, i};
        interp.b = {c, i + 1};
        interp.params = InterpObstacleParams{0.5, 1.0, {0.1, 0.25, 0.4}, 1.2, 0.2, 0.3};
        graph.add_factor(interp);
      }
      Factor obs;
      obs.kind = FactorKind::Obstacle;
      obs.a = {c, i};
      obs.params = ObstacleParams{1.2, 0.2, 0.3};
      graph.add_factor(obs);
    }
    graph.set_anchor({c, 0}, graph.value({c, 0}), 1e4);
    graph.set_anchor({c, n_steps}, graph.value({c, n_steps}), 1e4);
  }
  return graph;
}

}  // namespace

TEST_CASE("hinge clearance residual activates only within the safety margin") {
  const SignedDistanceField sdf = box_field();
  const double eps = 0.8;
  const double r_robot = 0.4;

  // Far from the box: sdf ~ 2.6 > eps + r, inactive.
  const HingeEval far = obstacle_residual(SupportState(8.0, 8.0, 0, 0), sdf, eps, r_robot);
  CHECK(far.residual == 0.0);
  CHECK(far.jacobian.norm() == 0.0);

  // Near the box face at x = 6: clearance ~ 0.55, e = eps - (d - r) > 0.
  const Vec2 p(6.55, 5.0);
  const double d = sdf_query(sdf, p).distance;
  REQUIRE(d - r_robot < eps);
  const HingeEval near = obstacle_residual(SupportState(p, Vec2::Zero()), sdf, eps, r_robot);
  CHECK(near.residual == doctest::Approx(eps - (d - r_robot)).epsilon(1e-12));
  // Active hinge pushes along -grad(sdf); velocity never enters.
  const Vec2 grad = sdf_query(sdf, p).gradient;
  CHECK(near.jacobian(0) == doctest::Approx(-grad.x()).epsilon(1e-12));
  CHECK(near.jacobian(1) == doctest::Approx(-grad.y()).epsilon(1e-12));
  CHECK(near.jacobian(2) == 0.0);
  CHECK(near.jacobian(3) == 0.0);

  // Inside the box: deeply active.
  const HingeEval inside =
      obstacle_residual(SupportState(5.0, 5.0, 0, 0), sdf, eps, r_robot);
  CHECK(inside.residual > eps);
}

TEST_CASE("hinge Jacobian matches finite differences away from the kink") {
  const SignedDistanceField sdf = box_field();
  RngStream rng(501);
  int checked = 0;
  for (int i = 0; i < 300 && checked < 100; ++i) {
    // Sample near the box so the hinge is active, keeping clear of both the
    // activation kink and bilinear cell boundaries.
    Vec4 x;
    x << rng.uniform(3.2, 6.8), rng.uniform(3.2, 6.8), rng.uniform(-1, 1),
        rng.uniform(-1, 1);
    const double cell = sdf.spec().cell_size;
    const double ux = (x(0) - sdf.spec().origin.x()) / cell - 0.5;
    const double uy = (x(1) - sdf.spec().origin.y()) / cell - 0.5;
    if (std::abs(ux - std::round(ux)) < 0.05 || std::abs(uy - std::round(uy)) < 0.05) {
      continue;
    }
    const HingeEval eval =
        obstacle_residual(SupportState::from_vector(x), sdf, 0.8, 0.4);
    if (eval.residual < 0.05) continue;  // stay away from the activation kink

    auto f = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      Eigen::VectorXd r(1);
      r(0) = obstacle_residual(SupportState::from_vector(v), sdf, 0.8, 0.4).residual;
      return r;
    };
    const Eigen::MatrixXd fd = ts::fd_jacobian(f, x, 1e-6);
    CHECK(ts::rel_error(eval.jacobian, fd) < 1e-4);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("factor errors match their closed-form definitions") {
  const SignedDistanceField sdf = box_field();
  Graph graph(1, 0.5);
  Vec4 a, b;
  a << 6.4, 5.1, 0.4, -0.2;
  b << 6.9, 5.4, 0.1, 0.3;
  graph.add_variable({1, 0}, a);
  graph.add_variable({1, 1}, b);

  Factor gp;
  gp.kind = FactorKind::GpPrior;
  gp.a = {1, 0};
  gp.b = {1, 1};
  gp.params = GpPriorParams{0.5, 0.7};
  const GpPriorEval gp_eval = gp_prior_residual(SupportState::from_vector(a),
                                                SupportState::from_vector(b), 0.5, 0.7);
  CHECK(factor_error(graph, gp, sdf) == doctest::Approx(gp_eval.error()).epsilon(1e-12));

  Factor obs;
  obs.kind = FactorKind::Obstacle;
  obs.a = {1, 0};
  obs.params = ObstacleParams{0.8, 0.1, 0.4};
  const HingeEval h = obstacle_residual(SupportState::from_vector(a), sdf, 0.8, 0.4);
  CHECK(factor_error(graph, obs, sdf) ==
        doctest::Approx(0.5 * h.residual * h.residual / (0.1 * 0.1)).epsilon(1e-12));

  Factor interp;
  interp.kind = FactorKind::InterpolatedObstacle;
  interp.a = {1, 0};
  interp.b = {1, 1};
  interp.params = InterpObstacleParams{0.5, 0.7, {0.1, 0.25, 0.4}, 0.8, 0.1, 0.4};
  double expected = 0.0;
  for (double tau : {0.1, 0.25, 0.4}) {
    const GpInterpEval st = gp_interpolate(SupportState::from_vector(a),
                                           SupportState::from_vector(b), tau, 0.5, 0.7);
    const HingeEval he = obstacle_residual(st.state, sdf, 0.8, 0.4);
    expected += 0.5 * he.residual * he.residual / (0.1 * 0.1);
  }
  CHECK(factor_error(graph, interp, sdf) == doctest::Approx(expected).epsilon(1e-12));

  Factor anchor;
  anchor.kind = FactorKind::Anchor;
  anchor.a = {1, 0};
  Vec4 target;
  target << 6.0, 5.0, 0.0, 0.0;
  anchor.params = AnchorParams{target, 1e3};
  CHECK(factor_error(graph, anchor, sdf) ==
        doctest::Approx(0.5 * 1e3 * (a - target).squaredNorm()).epsilon(1e-12));

  // graph_error sums the factor errors.
  graph.add_factor(gp);
  graph.add_factor(obs);
  graph.add_factor(interp);
  graph.add_factor(anchor);
  double total = 0.0;
  for (const Factor& f : graph.factors()) total += factor_error(graph, f, sdf);
  CHECK(graph_error(graph, sdf) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("block-sparse normal equations match a dense rebuild from factor evals") {
  const SignedDistanceField sdf = box_field();
  RngStream rng(601);
  for (int trial = 0; trial < 5; ++trial) {
    const Graph graph = random_mixed_graph(rng, 2, 4);
    const BlockSystem block = linearize(graph, sdf);
    const ts::DenseSystem dense = ts::dense_normal_equations(graph, sdf);

    REQUIRE(block.order.size() == dense.order.size());
    for (std::size_t i = 0; i < block.order.size(); ++i) {
      CHECK(block.order[i] == dense.order[i]);
    }
    CHECK(ts::rel_error(block.dense(), dense.hessian) < 1e-12);
    const double gscale = std::max(1.0, dense.gradient.norm());
    CHECK((block.gradient - dense.gradient).norm() / gscale < 1e-12);

    // Damped assembly: H + lambda * diag(H).
    const double lambda = 0.37;
    const Eigen::MatrixXd damped = block.assemble(lambda).toDense();
    Eigen::MatrixXd expected = dense.hessian;
    expected.diagonal() += lambda * dense.hessian.diagonal();
    CHECK(ts::rel_error(damped, expected) < 1e-12);
  }
}

TEST_CASE("sparse assembly covers exactly the interacting variable pairs") {
  const SignedDistanceField sdf = box_field();
  RngStream rng(602);
  const Graph graph = random_mixed_graph(rng, 2, 4);
  const BlockSystem block = linearize(graph, sdf);
  for (const auto& [key, mat] : block.blocks) {
    CHECK(key.first <= key.second);
  }
  // Diagonal blocks exist for every variable (anchors/obstacles at least).
  for (std::size_t i = 0; i < block.order.size(); ++i) {
    const auto it = block.blocks.find({static_cast<int>(i), static_cast<int>(i)});
    CHECK(it != block.blocks.end());
  }
}

TEST_CASE("graph variable and anchor bookkeeping") {
  Graph graph(2, 0.5);
  Vec4 v0, v1;
  v0 << 0, 0, 0, 0;
  v1 << 1, 1, 0, 0;
  graph.add_variable({1, 0}, v0);
  graph.add_variable({1, 1}, v1);
  CHECK(graph.variable_count() == 2);
  CHECK(graph.has_variable({1, 0}));
  CHECK_FALSE(graph.has_variable({2, 0}));
  CHECK_THROWS_AS(graph.value({9, 9}), std::exception);

  // set_anchor adds one anchor, then updates it in place.
  graph.set_anchor({1, 0}, v1, 100.0);
  graph.set_anchor({1, 0}, v0, 250.0);
  int anchors = 0;
  for (const Factor& f : graph.factors()) {
    if (f.kind == FactorKind::Anchor && f.a == VariableId{1, 0}) {
      ++anchors;
      const auto& p = std::get<AnchorParams>(f.params);
      CHECK(p.precision == 250.0);
      CHECK((p.target - v0).norm() == 0.0);
    }
  }
  CHECK(anchors == 1);

  Factor gp;
  gp.kind = FactorKind::GpPrior;
  gp.a = {1, 0};
  gp.b = {1, 1};
  gp.params = GpPriorParams{0.5, 1.0};
  graph.add_factor(gp);
  CHECK(graph.connected());

  // Dropping a variable removes the factors touching it.
  graph.remove_variables({{1, 1}});
  CHECK_FALSE(graph.has_variable({1, 1}));
  for (const Factor& f : graph.factors()) {
    CHECK(f.a != VariableId{1, 1});
    if (f.binary()) CHECK(f.b != VariableId{1, 1});
  }
}

TEST_CASE("connectivity detects split components") {
  Graph graph(1, 0.5);
  Vec4 z = Vec4::Zero();
  graph.add_variable({1, 0}, z);
  graph.add_variable({1, 1}, z);
  graph.add_variable({2, 0}, z);
  graph.add_variable({2, 1}, z);
  Factor f1;
  f1.kind = FactorKind::GpPrior;
  f1.a = {1, 0};
  f1.b = {1, 1};
  f1.params = GpPriorParams{};
  graph.add_factor(f1);
  Factor f2 = f1;
  f2.a = {2, 0};
  f2.b = {2, 1};
  graph.add_factor(f2);
  CHECK_FALSE(graph.connected());
  Factor bridge = f1;
  bridge.a = {1, 1};
  bridge.b = {2, 0};
  graph.add_factor(bridge);
  CHECK(graph.connected());
}

TEST_CASE("graph dump is valid deterministic JSON") {
  RngStream rng(603);
  const Graph graph = random_mixed_graph(rng, 2, 3);
  const std::string a = dump_graph_json(graph);
  const std::string b = dump_graph_json(graph);
  CHECK(a == b);
  const nlohmann::json parsed = nlohmann::json::parse(a);
  CHECK(parsed.contains("variables"));
  CHECK(parsed.contains("factors"));
  CHECK(parsed["variables"].size() == graph.variable_count());
  CHECK(parsed["factors"].size() == graph.factors().size());
}
