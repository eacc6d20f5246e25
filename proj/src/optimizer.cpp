#include "posh/optimizer.hpp"

#include <Eigen/SparseCholesky>

#include <stdexcept>

namespace posh {

void LmParams::validate() const {
  if (!(lambda_init > 0.0)) throw std::invalid_argument("LmParams: lambda_init must be > 0");
  if (!(lambda_factor > 1.0)) {
    throw std::invalid_argument("LmParams: lambda_factor must be > 1");
  }
  if (max_iters < 1) throw std::invalid_argument("LmParams: max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("LmParams: rel_tol must be > 0");
  if (!(abs_tol > 0.0)) throw std::invalid_argument("LmParams: abs_tol must be > 0");
  if (!(lambda_max > lambda_init)) {
    throw std::invalid_argument("LmParams: lambda_max must exceed lambda_init");
  }
}

LmStats optimize(Graph& graph, const SignedDistanceField& sdf, const LmParams& params) {
  params.validate();
  LmStats stats;
  double error = graph_error(graph, sdf);
  stats.initial_error = error;
  stats.final_error = error;
  if (graph.variable_count() == 0) return stats;

  BlockSystem sys = linearize(graph, sdf);
  const double grad_floor = 1e-12;
  if (sys.gradient.lpNorm<Eigen::Infinity>() < grad_floor) {
    return stats;  // already stationary
  }

  // Variable order is fixed by the graph, so the factorization keeps it.
  using Solver = Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                      Eigen::NaturalOrdering<int>>;
  double lambda = params.lambda_init;

  for (int iter = 1; iter <= params.max_iters; ++iter) {
    stats.iterations = iter;
    const Eigen::SparseMatrix<double> h = sys.assemble(lambda);
    Solver solver;
    solver.compute(h);
    bool ok = solver.info() == Eigen::Success;
    Eigen::VectorXd delta;
    if (ok) {
      delta = solver.solve(-sys.gradient);
      ok = solver.info() == Eigen::Success && delta.allFinite();
    }

    double trial_error = error;
    Graph trial;
    if (ok) {
      trial = graph;
      int vi = 0;
      for (const auto& [id, value] : graph.variables()) {
        trial.set_value(id, value + delta.segment<4>(vi * 4));
        ++vi;
      }
      trial_error = graph_error(trial, sdf);
    }

    const bool accepted = ok && trial_error < error;
    stats.trace.push_back({iter, lambda, accepted ? trial_error : error, accepted});

    if (accepted) {
      const double prev_error = error;
      graph = std::move(trial);
      error = trial_error;
      ++stats.accepted_steps;
      lambda /= params.lambda_factor;
      const double rel_drop = (prev_error - error) / std::max(prev_error, 1e-300);
      if (rel_drop < params.rel_tol || delta.norm() < params.abs_tol) break;
      sys = linearize(graph, sdf);
      if (sys.gradient.lpNorm<Eigen::Infinity>() < grad_floor) break;
    } else {
      lambda *= params.lambda_factor;
      if (lambda >= params.lambda_max) {
        stats.converged = false;
        break;
      }
    }
  }

  stats.final_error = error;
  return stats;
}

}  // namespace posh
