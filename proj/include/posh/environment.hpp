#pragma once

#include <Eigen/Dense>
#include <vector>

#include "posh/rng.hpp"
#include "posh/types.hpp"

namespace posh {

// Axis-aligned box obstacle. `motion` tags how the world steppers move it.
struct Obstacle {
  enum class Motion { Static, PatrolX, RandomAccel };

  int id{0};
  Vec2 center{Vec2::Zero()};
  Vec2 half_extents{Vec2::Zero()};
  Vec2 velocity{Vec2::Zero()};
  Motion motion{Motion::Static};
  double patrol_lo{0.0};  // center-x bounds for PatrolX
  double patrol_hi{0.0};

  bool contains(const Vec2& p) const {
    return std::abs(p.x() - center.x()) <= half_extents.x() &&
           std::abs(p.y() - center.y()) <= half_extents.y();
  }
};

struct GridSpec {
  Vec2 origin{Vec2::Zero()};  // lower-left corner of cell (0,0)
  double cell_size{0.1};
  Eigen::Vector2i dims{Eigen::Vector2i::Zero()};

  Vec2 cell_center(int ix, int iy) const {
    return origin + Vec2((ix + 0.5) * cell_size, (iy + 0.5) * cell_size);
  }

  void validate() const;
};

// Grid of signed clearances: positive outside obstacles (distance to the
// nearest occupied cell center), negative inside (distance to the nearest
// free cell center), both in meters. Values are clamped at the grid diameter.
class SignedDistanceField {
 public:
  SignedDistanceField() = default;
  SignedDistanceField(GridSpec spec, Eigen::MatrixXd values);

  const GridSpec& spec() const { return spec_; }
  const Eigen::MatrixXd& values() const { return values_; }
  double value_at(int ix, int iy) const { return values_(ix, iy); }

 private:
  GridSpec spec_;
  Eigen::MatrixXd values_;  // (dims.x, dims.y)
};

// Exact Euclidean distance transform of the obstacle occupancy.
SignedDistanceField compute_sdf(const std::vector<Obstacle>& obstacles,
                                const GridSpec& spec);

struct SdfSample {
  double distance{0.0};
  Vec2 gradient{Vec2::Zero()};
};

// Bilinear value and analytic gradient over the cell-center lattice. Points
// outside the grid are clamped to the boundary, with the clamped gradient
// component replaced by a unit pull back toward the interior.
SdfSample sdf_query(const SignedDistanceField& sdf, const Vec2& point);

struct MotionParams {
  double dt{0.5};
  double a_max{0.5};
  double v_max{1.0};
  Vec2 ws_min{Vec2::Zero()};
  Vec2 ws_max{Vec2::Zero()};
};

struct WorldState {
  std::vector<Obstacle> obstacles;
  SupportState robot_true;
  int time_index{0};
};

// Advances PatrolX obstacles one step: constant speed along x, reflecting at
// the patrol bounds (triangle-wave center trajectory). Others stay put.
WorldState step_obstacles_narrow_passage(const WorldState& world,
                                         const MotionParams& params);

// Advances RandomAccel obstacles one step: uniform random acceleration in
// [-a_max, a_max]^2 times dt, speed clamped to v_max, reflecting off the
// workspace bounds. Others stay put.
WorldState step_obstacles_forest(const WorldState& world, const MotionParams& params,
                                 RngStream& rng);

}  // namespace posh
