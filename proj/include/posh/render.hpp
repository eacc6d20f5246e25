#pragma once

#include <string>
#include <vector>

#include "posh/config.hpp"
#include "posh/planner.hpp"

namespace posh {

// One frame of the world: obstacles, the executed trajectory so far, the
// currently planned path, and any segments dropped by pruning.
struct RenderFrame {
  Vec2 ws_min{Vec2::Zero()};
  Vec2 ws_max{Vec2::Zero()};
  double robot_radius{0.4};
  std::vector<Obstacle> obstacles;
  Vec2 robot{Vec2::Zero()};
  Vec2 goal{Vec2::Zero()};
  std::vector<std::pair<Vec2, Vec2>> graph_edges;  // motion-prior edges, thin gray
  std::vector<Vec2> executed;
  std::vector<Vec2> planned;
  std::vector<std::pair<Vec2, Vec2>> pruned_segments;
};

// Deterministic SVG 1.1 document (fixed decimal formatting, no timestamps).
std::string render_svg(const RenderFrame& frame);

}  // namespace posh
