#pragma once

#include <Eigen/Dense>

namespace posh {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using RowVec4 = Eigen::RowVector4d;

// One trajectory waypoint: planar position plus velocity.
// Stacked vector layout is [px, py, vx, vy].
struct SupportState {
  Vec2 position{Vec2::Zero()};
  Vec2 velocity{Vec2::Zero()};

  SupportState() = default;
  SupportState(const Vec2& p, const Vec2& v) : position(p), velocity(v) {}
  SupportState(double px, double py, double vx, double vy)
      : position(px, py), velocity(vx, vy) {}

  Vec4 vector() const {
    Vec4 x;
    x << position, velocity;
    return x;
  }

  static SupportState from_vector(const Vec4& x) {
    return SupportState(x.head<2>(), x.tail<2>());
  }

  bool all_finite() const {
    return position.allFinite() && velocity.allFinite();
  }
};

}  // namespace posh
