#pragma once

#include <optional>

#include "posh/factor_graph.hpp"
#include "posh/types.hpp"

namespace posh {

struct BuilderParams {
  int n_chains{4};
  int n_steps{20};
  double dt{0.5};
  double qc{1.0};
  double interconnection_ratio{0.5};  // 0 = none, 1 = every usable time index
  double interconnection_qc{1.0};
  std::optional<double> b_max;  // max minor radius; defaults to half the major radius
  int n_interp{4};              // interpolated clearance checks per edge
  double eps{0.8};
  double sigma_obs{0.1};
  double r_robot{0.4};
  double anchor_precision{1e6};

  void validate() const;
};

// Lays out n_chains half-ellipse trajectories sharing the start and goal
// variables, with GpPrior edges along each chain, clearance factors on every
// variable and edge, and anchors pinning the endpoints.
Graph build_chains(const SupportState& start, const SupportState& goal,
                   const BuilderParams& params);

// Adds forward-in-time GpPrior + interpolated clearance edges between
// adjacent chains (ordered by minor radius) every k-th usable time index,
// k = max(1, round(1 / interconnection_ratio)); a ratio of 0 adds nothing.
Graph interconnect(Graph graph, const BuilderParams& params);

}  // namespace posh
