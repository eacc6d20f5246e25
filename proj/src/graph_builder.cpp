#include "posh/graph_builder.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace posh {

void BuilderParams::validate() const {
  if (n_chains < 1) throw std::invalid_argument("BuilderParams: n_chains must be >= 1");
  if (n_steps < 2) throw std::invalid_argument("BuilderParams: n_steps must be >= 2");
  if (!(dt > 0.0)) throw std::invalid_argument("BuilderParams: dt must be > 0");
  if (!(qc > 0.0)) throw std::invalid_argument("BuilderParams: qc must be > 0");
  if (!(interconnection_qc > 0.0)) {
    throw std::invalid_argument("BuilderParams: interconnection_qc must be > 0");
  }
  if (interconnection_ratio < 0.0 || interconnection_ratio > 1.0) {
    throw std::invalid_argument("BuilderParams: interconnection_ratio must be in [0, 1]");
  }
  if (b_max && !(*b_max > 0.0)) {
    throw std::invalid_argument("BuilderParams: b_max must be > 0 when given");
  }
  if (n_interp < 0) throw std::invalid_argument("BuilderParams: n_interp must be >= 0");
  if (!(eps > 0.0)) throw std::invalid_argument("BuilderParams: eps must be > 0");
  if (!(sigma_obs > 0.0)) throw std::invalid_argument("BuilderParams: sigma_obs must be > 0");
  if (r_robot < 0.0) throw std::invalid_argument("BuilderParams: r_robot must be >= 0");
  if (!(anchor_precision > 0.0)) {
    throw std::invalid_argument("BuilderParams: anchor_precision must be > 0");
  }
}

namespace {

std::vector<double> interp_taus(const BuilderParams& p) {
  std::vector<double> taus;
  taus.reserve(p.n_interp);
  for (int k = 1; k <= p.n_interp; ++k) {
    taus.push_back(p.dt * k / (p.n_interp + 1));
  }
  return taus;
}

Factor make_gp_edge(VariableId a, VariableId b, double dt, double qc) {
  Factor f;
  f.kind = FactorKind::GpPrior;
  f.a = a;
  f.b = b;
  f.params = GpPriorParams{dt, qc};
  return f;
}

Factor make_interp_edge(VariableId a, VariableId b, const BuilderParams& p,
                        const std::vector<double>& taus) {
  Factor f;
  f.kind = FactorKind::InterpolatedObstacle;
  f.a = a;
  f.b = b;
  f.params = InterpObstacleParams{p.dt, p.qc, taus, p.eps, p.sigma_obs, p.r_robot};
  return f;
}

}  // namespace

Graph build_chains(const SupportState& start, const SupportState& goal,
                   const BuilderParams& params) {
  params.validate();
  if (!start.all_finite() || !goal.all_finite()) {
    throw std::invalid_argument("build_chains: start/goal must be finite");
  }
  const Vec2 span = goal.position - start.position;
  const double dist = span.norm();
  if (!(dist > 0.0)) {
    throw std::invalid_argument("build_chains: start and goal must be distinct");
  }

  const int n = params.n_steps;
  const int n_chains = params.n_chains;
  const double a = dist / 2.0;  // major radius
  const double b_max = params.b_max.value_or(a / 2.0);
  const Vec2 center = 0.5 * (start.position + goal.position);
  const Vec2 u_hat = span / dist;
  const Vec2 n_hat(-u_hat.y(), u_hat.x());

  // Minor radii spread evenly over [-b_max, b_max]; a single chain sits on
  // the straight segment, odd counts include it.
  std::vector<double> radii(n_chains);
  if (n_chains == 1) {
    radii[0] = 0.0;
  } else {
    for (int j = 0; j < n_chains; ++j) {
      radii[j] = -b_max + 2.0 * b_max * j / (n_chains - 1);
    }
  }

  Graph graph(n, params.dt);
  graph.add_variable(graph.start_id(), start.vector());
  graph.add_variable(graph.goal_id(), goal.vector());

  const std::vector<double> taus = interp_taus(params);

  for (int j = 0; j < n_chains; ++j) {
    const int chain = j + 1;
    // Half-ellipse sampled from theta = pi (start) down to 0 (goal).
    std::vector<Vec2> pos(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double theta = M_PI * (1.0 - static_cast<double>(i) / n);
      pos[i] = center + a * std::cos(theta) * u_hat + radii[j] * std::sin(theta) * n_hat;
    }
    for (int i = 1; i < n; ++i) {
      const Vec2 vel = (pos[i + 1] - pos[i - 1]) / (2.0 * params.dt);
      Vec4 value;
      value << pos[i], vel;
      graph.add_variable({chain, i}, value);
    }
    auto id_at = [&](int i) -> VariableId {
      if (i == 0) return graph.start_id();
      if (i == n) return graph.goal_id();
      return {chain, i};
    };
    for (int i = 0; i < n; ++i) {
      graph.add_factor(make_gp_edge(id_at(i), id_at(i + 1), params.dt, params.qc));
      if (!taus.empty()) {
        graph.add_factor(make_interp_edge(id_at(i), id_at(i + 1), params, taus));
      }
    }
  }

  // One clearance factor per variable, shared endpoints included once.
  for (const auto& [id, value] : graph.variables()) {
    Factor f;
    f.kind = FactorKind::Obstacle;
    f.a = id;
    f.params = ObstacleParams{params.eps, params.sigma_obs, params.r_robot};
    graph.add_factor(std::move(f));
  }

  graph.set_anchor(graph.start_id(), start.vector(), params.anchor_precision);
  graph.set_anchor(graph.goal_id(), goal.vector(), params.anchor_precision);
  return graph;
}

Graph interconnect(Graph graph, const BuilderParams& params) {
  params.validate();
  if (params.interconnection_ratio <= 0.0 || params.n_chains < 2) return graph;
  const int k = std::max(1, static_cast<int>(std::lround(1.0 / params.interconnection_ratio)));
  const int n = graph.n_steps();
  const std::vector<double> taus = interp_taus(params);

  // Chain ids are already ordered by minor radius, so adjacent ids are
  // geometric neighbours. Cross edges only exist between interior states:
  // at i = 0 and i = n-1 they would collapse onto the shared endpoints.
  for (int chain = 1; chain < params.n_chains; ++chain) {
    for (int i = 1; i + 1 < n; ++i) {
      if (i % k != 0) continue;
      const VariableId lo_a{chain, i};
      const VariableId lo_b{chain, i + 1};
      const VariableId hi_a{chain + 1, i};
      const VariableId hi_b{chain + 1, i + 1};
      graph.add_factor(make_gp_edge(lo_a, hi_b, params.dt, params.interconnection_qc));
      graph.add_factor(make_gp_edge(hi_a, lo_b, params.dt, params.interconnection_qc));
      if (!taus.empty()) {
        graph.add_factor(make_interp_edge(lo_a, hi_b, params, taus));
        graph.add_factor(make_interp_edge(hi_a, lo_b, params, taus));
      }
    }
  }
  return graph;
}

}  // namespace posh
