#include "posh/factor_graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace posh {

HingeEval obstacle_residual(const SupportState& x, const SignedDistanceField& sdf,
                            double eps, double r_robot) {
  HingeEval out;
  const SdfSample sample = sdf_query(sdf, x.position);
  const double clearance = sample.distance - r_robot;
  if (clearance < eps) {
    out.residual = eps - clearance;
    out.jacobian(0) = -sample.gradient.x();
    out.jacobian(1) = -sample.gradient.y();
  }
  return out;
}

const Vec4& Graph::value(VariableId id) const {
  auto it = values_.find(id);
  if (it == values_.end()) throw std::invalid_argument("Graph: unknown variable");
  return it->second;
}

void Graph::set_value(VariableId id, const Vec4& v) {
  auto it = values_.find(id);
  if (it == values_.end()) throw std::invalid_argument("Graph: unknown variable");
  it->second = v;
}

void Graph::add_variable(VariableId id, const Vec4& v) {
  if (!v.allFinite()) throw std::invalid_argument("Graph: variable value must be finite");
  if (!values_.emplace(id, v).second) {
    throw std::invalid_argument("Graph: duplicate variable");
  }
}

void Graph::add_factor(Factor f) {
  if (!has_variable(f.a)) throw std::invalid_argument("Graph: factor references unknown variable");
  if (f.binary() && !has_variable(f.b)) {
    throw std::invalid_argument("Graph: factor references unknown variable");
  }
  factors_.push_back(std::move(f));
}

void Graph::set_anchor(VariableId id, const Vec4& target, double precision) {
  if (!has_variable(id)) throw std::invalid_argument("Graph: unknown variable");
  for (Factor& f : factors_) {
    if (f.kind == FactorKind::Anchor && f.a == id) {
      f.params = AnchorParams{target, precision};
      return;
    }
  }
  Factor f;
  f.kind = FactorKind::Anchor;
  f.a = id;
  f.params = AnchorParams{target, precision};
  factors_.push_back(std::move(f));
}

void Graph::remove_variables(const std::set<VariableId>& doomed) {
  if (doomed.empty()) return;
  factors_.erase(std::remove_if(factors_.begin(), factors_.end(),
                                [&](const Factor& f) {
                                  return doomed.count(f.a) != 0 ||
                                         (f.binary() && doomed.count(f.b) != 0);
                                }),
                 factors_.end());
  for (const VariableId& id : doomed) values_.erase(id);
}

bool Graph::connected() const {
  if (values_.empty()) return true;
  std::map<VariableId, std::vector<VariableId>> adj;
  for (const Factor& f : factors_) {
    if (!f.binary()) continue;
    adj[f.a].push_back(f.b);
    adj[f.b].push_back(f.a);
  }
  std::set<VariableId> seen;
  std::vector<VariableId> stack{values_.begin()->first};
  seen.insert(stack.back());
  while (!stack.empty()) {
    VariableId v = stack.back();
    stack.pop_back();
    for (VariableId w : adj[v]) {
      if (seen.insert(w).second) stack.push_back(w);
    }
  }
  return seen.size() == values_.size();
}

double factor_error(const Graph& graph, const Factor& factor,
                    const SignedDistanceField& sdf) {
  switch (factor.kind) {
    case FactorKind::GpPrior: {
      const auto& p = std::get<GpPriorParams>(factor.params);
      const auto eval = gp_prior_residual(SupportState::from_vector(graph.value(factor.a)),
                                          SupportState::from_vector(graph.value(factor.b)),
                                          p.dt, p.qc);
      return eval.error();
    }
    case FactorKind::Obstacle: {
      const auto& p = std::get<ObstacleParams>(factor.params);
      const HingeEval h = obstacle_residual(SupportState::from_vector(graph.value(factor.a)),
                                            sdf, p.eps, p.r_robot);
      return 0.5 * h.residual * h.residual / (p.sigma_obs * p.sigma_obs);
    }
    case FactorKind::InterpolatedObstacle: {
      const auto& p = std::get<InterpObstacleParams>(factor.params);
      const SupportState xa = SupportState::from_vector(graph.value(factor.a));
      const SupportState xb = SupportState::from_vector(graph.value(factor.b));
      double err = 0.0;
      for (double tau : p.taus) {
        const GpInterpEval interp = gp_interpolate(xa, xb, tau, p.dt, p.qc);
        const HingeEval h = obstacle_residual(interp.state, sdf, p.eps, p.r_robot);
        err += 0.5 * h.residual * h.residual / (p.sigma_obs * p.sigma_obs);
      }
      return err;
    }
    case FactorKind::Anchor: {
      const auto& p = std::get<AnchorParams>(factor.params);
      const Vec4 r = graph.value(factor.a) - p.target;
      return 0.5 * p.precision * r.squaredNorm();
    }
  }
  return 0.0;
}

double graph_error(const Graph& graph, const SignedDistanceField& sdf) {
  double total = 0.0;
  for (const Factor& f : graph.factors()) total += factor_error(graph, f, sdf);
  return total;
}

Eigen::SparseMatrix<double> BlockSystem::assemble(double lambda) const {
  const int dim = static_cast<int>(order.size()) * 4;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(blocks.size() * 32);
  for (const auto& [key, block] : blocks) {
    const int ri = key.first * 4;
    const int cj = key.second * 4;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        double v = block(r, c);
        if (key.first == key.second) {
          if (r == c) v += lambda * block(r, r);
          triplets.emplace_back(ri + r, cj + c, v);
        } else {
          triplets.emplace_back(ri + r, cj + c, v);
          triplets.emplace_back(cj + c, ri + r, v);
        }
      }
    }
  }
  Eigen::SparseMatrix<double> h(dim, dim);
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

Eigen::MatrixXd BlockSystem::dense() const {
  const int dim = static_cast<int>(order.size()) * 4;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& [key, block] : blocks) {
    h.block<4, 4>(key.first * 4, key.second * 4) = block;
    if (key.first != key.second) {
      h.block<4, 4>(key.second * 4, key.first * 4) = block.transpose();
    }
  }
  return h;
}

BlockSystem linearize(const Graph& graph, const SignedDistanceField& sdf) {
  BlockSystem sys;
  sys.order.reserve(graph.variable_count());
  for (const auto& [id, value] : graph.variables()) {
    sys.index.emplace(id, static_cast<int>(sys.order.size()));
    sys.order.push_back(id);
  }
  sys.gradient = Eigen::VectorXd::Zero(static_cast<int>(sys.order.size()) * 4);

  auto block_of = [&](int i, int j) -> Mat4& {
    auto key = i <= j ? std::make_pair(i, j) : std::make_pair(j, i);
    auto it = sys.blocks.find(key);
    if (it == sys.blocks.end()) {
      it = sys.blocks.emplace(key, Mat4::Zero()).first;
    }
    return it->second;
  };

  for (const Factor& f : graph.factors()) {
    const int ia = sys.index.at(f.a);
    switch (f.kind) {
      case FactorKind::GpPrior: {
        const auto& p = std::get<GpPriorParams>(f.params);
        const int ib = sys.index.at(f.b);
        const auto eval = gp_prior_residual(SupportState::from_vector(graph.value(f.a)),
                                            SupportState::from_vector(graph.value(f.b)),
                                            p.dt, p.qc);
        const Mat4& ja = eval.jacobian_a;
        const Mat4& jb = eval.jacobian_b;
        const Mat4& lam = eval.precision;
        const Vec4 weighted_r = lam * eval.residual;
        block_of(ia, ia) += ja.transpose() * lam * ja;
        block_of(ib, ib) += jb.transpose() * lam * jb;
        if (ia <= ib) {
          block_of(ia, ib) += ja.transpose() * lam * jb;
        } else {
          block_of(ib, ia) += jb.transpose() * lam * ja;
        }
        sys.gradient.segment<4>(ia * 4) += ja.transpose() * weighted_r;
        sys.gradient.segment<4>(ib * 4) += jb.transpose() * weighted_r;
        break;
      }
      case FactorKind::Obstacle: {
        const auto& p = std::get<ObstacleParams>(f.params);
        const double w = 1.0 / (p.sigma_obs * p.sigma_obs);
        const HingeEval h = obstacle_residual(SupportState::from_vector(graph.value(f.a)),
                                              sdf, p.eps, p.r_robot);
        block_of(ia, ia) += w * h.jacobian.transpose() * h.jacobian;
        sys.gradient.segment<4>(ia * 4) += w * h.residual * h.jacobian.transpose();
        break;
      }
      case FactorKind::InterpolatedObstacle: {
        const auto& p = std::get<InterpObstacleParams>(f.params);
        const int ib = sys.index.at(f.b);
        const double w = 1.0 / (p.sigma_obs * p.sigma_obs);
        const SupportState xa = SupportState::from_vector(graph.value(f.a));
        const SupportState xb = SupportState::from_vector(graph.value(f.b));
        // touch the pair's block so the sparsity pattern stays exact even
        // when every hinge is inactive
        block_of(ia, ia);
        block_of(ib, ib);
        block_of(std::min(ia, ib), std::max(ia, ib));
        for (double tau : p.taus) {
          const GpInterpEval interp = gp_interpolate(xa, xb, tau, p.dt, p.qc);
          const HingeEval h = obstacle_residual(interp.state, sdf, p.eps, p.r_robot);
          if (h.residual == 0.0) continue;
          const RowVec4 ja = h.jacobian * interp.jacobian_a;
          const RowVec4 jb = h.jacobian * interp.jacobian_b;
          block_of(ia, ia) += w * ja.transpose() * ja;
          block_of(ib, ib) += w * jb.transpose() * jb;
          if (ia <= ib) {
            block_of(ia, ib) += w * ja.transpose() * jb;
          } else {
            block_of(ib, ia) += w * jb.transpose() * ja;
          }
          sys.gradient.segment<4>(ia * 4) += w * h.residual * ja.transpose();
          sys.gradient.segment<4>(ib * 4) += w * h.residual * jb.transpose();
        }
        break;
      }
      case FactorKind::Anchor: {
        const auto& p = std::get<AnchorParams>(f.params);
        const Vec4 r = graph.value(f.a) - p.target;
        block_of(ia, ia) += p.precision * Mat4::Identity();
        sys.gradient.segment<4>(ia * 4) += p.precision * r;
        break;
      }
    }
  }
  return sys;
}

std::string dump_graph_json(const Graph& graph) {
  nlohmann::json j;
  j["n_steps"] = graph.n_steps();
  j["dt"] = graph.dt();
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& [id, value] : graph.variables()) {
    vars.push_back({{"chain", id.chain},
                    {"time", id.time_index},
                    {"value", {value(0), value(1), value(2), value(3)}}});
  }
  j["variables"] = std::move(vars);
  nlohmann::json factors = nlohmann::json::array();
  for (const Factor& f : graph.factors()) {
    nlohmann::json fj;
    fj["a"] = {f.a.chain, f.a.time_index};
    switch (f.kind) {
      case FactorKind::GpPrior: {
        const auto& p = std::get<GpPriorParams>(f.params);
        fj["kind"] = "gp_prior";
        fj["b"] = {f.b.chain, f.b.time_index};
        fj["dt"] = p.dt;
        fj["qc"] = p.qc;
        break;
      }
      case FactorKind::Obstacle: {
        const auto& p = std::get<ObstacleParams>(f.params);
        fj["kind"] = "obstacle";
        fj["eps"] = p.eps;
        fj["sigma_obs"] = p.sigma_obs;
        fj["r_robot"] = p.r_robot;
        break;
      }
      case FactorKind::InterpolatedObstacle: {
        const auto& p = std::get<InterpObstacleParams>(f.params);
        fj["kind"] = "interpolated_obstacle";
        fj["b"] = {f.b.chain, f.b.time_index};
        fj["taus"] = p.taus;
        fj["eps"] = p.eps;
        fj["sigma_obs"] = p.sigma_obs;
        fj["r_robot"] = p.r_robot;
        break;
      }
      case FactorKind::Anchor: {
        const auto& p = std::get<AnchorParams>(f.params);
        fj["kind"] = "anchor";
        fj["target"] = {p.target(0), p.target(1), p.target(2), p.target(3)};
        fj["precision"] = p.precision;
        break;
      }
    }
    factors.push_back(std::move(fj));
  }
  j["factors"] = std::move(factors);
  return j.dump(2);
}

}  // namespace posh
