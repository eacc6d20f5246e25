#pragma once

#include <vector>

#include "posh/factor_graph.hpp"

namespace posh {

struct LmParams {
  double lambda_init{1e-5};
  double lambda_factor{10.0};
  int max_iters{100};
  double rel_tol{1e-4};   // relative error decrease per accepted step
  double abs_tol{1e-6};   // step norm
  double lambda_max{1e10};

  void validate() const;
};

struct LmIteration {
  int iteration{0};
  double lambda{0.0};  // damping used for this attempt
  double error{0.0};   // error after the attempt (unchanged if rejected)
  bool accepted{false};
};

struct LmStats {
  int iterations{0};
  int accepted_steps{0};
  double initial_error{0.0};
  double final_error{0.0};
  bool converged{true};  // false when lambda ran away or the solver kept failing
  std::vector<LmIteration> trace;
};

// Levenberg-Marquardt with multiplicative diag(H) damping. Steps are accepted
// only when the total error decreases, so values never get worse; on
// non-convergence the best-so-far values are kept.
LmStats optimize(Graph& graph, const SignedDistanceField& sdf, const LmParams& params);

}  // namespace posh
