#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <compare>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "posh/environment.hpp"
#include "posh/gp_model.hpp"
#include "posh/types.hpp"

namespace posh {

// (chain, time_index) address of a trajectory variable. The shared start and
// goal live on chain 0 at time 0 and time n; interior chains are 1-based.
struct VariableId {
  int chain{0};
  int time_index{0};

  auto operator<=>(const VariableId&) const = default;
};

enum class FactorKind { GpPrior, Obstacle, InterpolatedObstacle, Anchor };

struct GpPriorParams {
  double dt{0.5};
  double qc{1.0};
};

struct ObstacleParams {
  double eps{0.8};        // clearance below which cost activates
  double sigma_obs{0.1};  // residual is weighted by 1/sigma^2
  double r_robot{0.4};
};

struct InterpObstacleParams {
  double dt{0.5};
  double qc{1.0};
  std::vector<double> taus;  // strictly inside (0, dt)
  double eps{0.8};
  double sigma_obs{0.1};
  double r_robot{0.4};
};

struct AnchorParams {
  Vec4 target{Vec4::Zero()};
  double precision{1e6};  // per dimension
};

struct Factor {
  FactorKind kind{FactorKind::GpPrior};
  VariableId a;
  VariableId b;  // meaningful for binary kinds only
  std::variant<GpPriorParams, ObstacleParams, InterpObstacleParams, AnchorParams> params;

  bool binary() const {
    return kind == FactorKind::GpPrior || kind == FactorKind::InterpolatedObstacle;
  }
};

// Hinge clearance residual at one state: e = max(eps - (sdf(p) - r_robot), 0)
// with its 1x4 Jacobian (zero when inactive).
struct HingeEval {
  double residual{0.0};
  RowVec4 jacobian{RowVec4::Zero()};
};

HingeEval obstacle_residual(const SupportState& x, const SignedDistanceField& sdf,
                            double eps, double r_robot);

// Multi-chain trajectory graph: variable values keyed by id (lexicographic
// (chain, time) order) plus a flat factor list.
class Graph {
 public:
  Graph() = default;
  Graph(int n_steps, double dt) : n_(n_steps), dt_(dt) {}

  int n_steps() const { return n_; }
  double dt() const { return dt_; }
  VariableId start_id() const { return {0, 0}; }
  VariableId goal_id() const { return {0, n_}; }

  bool has_variable(VariableId id) const { return values_.count(id) != 0; }
  std::size_t variable_count() const { return values_.size(); }
  const std::map<VariableId, Vec4>& variables() const { return values_; }

  const Vec4& value(VariableId id) const;
  void set_value(VariableId id, const Vec4& v);
  void add_variable(VariableId id, const Vec4& v);

  const std::vector<Factor>& factors() const { return factors_; }
  void add_factor(Factor f);

  // Updates the anchor on `id` in place, or adds one if absent.
  void set_anchor(VariableId id, const Vec4& target, double precision);

  // Drops the given variables and every factor touching them.
  void remove_variables(const std::set<VariableId>& doomed);

  // True when the factor graph is one connected component over its factors.
  bool connected() const;

 private:
  int n_{0};
  double dt_{0.0};
  std::map<VariableId, Vec4> values_;
  std::vector<Factor> factors_;
};

double factor_error(const Graph& graph, const Factor& factor,
                    const SignedDistanceField& sdf);
double graph_error(const Graph& graph, const SignedDistanceField& sdf);

// Normal equations over stacked 4-dim variable blocks. Block keys index into
// `order` with i <= j; the pattern covers exactly the variable pairs sharing
// a factor.
struct BlockSystem {
  std::vector<VariableId> order;
  std::map<VariableId, int> index;
  std::map<std::pair<int, int>, Mat4> blocks;
  Eigen::VectorXd gradient;

  // H + lambda * diag(H) as a sparse matrix (lambda = 0 for plain H).
  Eigen::SparseMatrix<double> assemble(double lambda) const;
  Eigen::MatrixXd dense() const;
};

BlockSystem linearize(const Graph& graph, const SignedDistanceField& sdf);

// Debug dump of variables and factors, deterministic field order.
std::string dump_graph_json(const Graph& graph);

}  // namespace posh
