#include "posh/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace posh {

void GridSpec::validate() const {
  if (!(cell_size > 0.0)) throw std::invalid_argument("GridSpec: cell_size must be > 0");
  if (dims.x() < 2 || dims.y() < 2) {
    throw std::invalid_argument("GridSpec: dims must be at least 2x2");
  }
  if (!origin.allFinite()) throw std::invalid_argument("GridSpec: origin must be finite");
}

SignedDistanceField::SignedDistanceField(GridSpec spec, Eigen::MatrixXd values)
    : spec_(spec), values_(std::move(values)) {
  spec_.validate();
  if (values_.rows() != spec_.dims.x() || values_.cols() != spec_.dims.y()) {
    throw std::invalid_argument("SignedDistanceField: value grid does not match dims");
  }
}

namespace {

// One-dimensional squared-distance transform over the first n entries of f
// (lower envelope of parabolas). Absent sites carry a large sentinel offset.
// All finite inputs are small integers, so the envelope arithmetic is exact
// enough to reproduce the brute-force transform bit for bit.
void dt_1d(const std::vector<double>& f, int n, std::vector<double>& d,
           std::vector<int>& v, std::vector<double>& z) {
  auto crossing = [&](int q, int p) {
    const double fq = f[q] + static_cast<double>(q) * q;
    const double fp = f[p] + static_cast<double>(p) * p;
    return (fq - fp) / (2.0 * q - 2.0 * p);
  };
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = crossing(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = crossing(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dx = q - v[k];
    d[q] = dx * dx + f[v[k]];
  }
}

// Squared distance in cell units from every cell to the nearest marked cell.
// Cells where no mark is reachable end up >= `unreachable`.
Eigen::MatrixXd edt_squared(const std::vector<std::uint8_t>& marked, int nx, int ny,
                            double unreachable) {
  Eigen::MatrixXd out(nx, ny);
  const int n_max = std::max(nx, ny);
  std::vector<double> f(n_max);
  std::vector<double> d(n_max);
  std::vector<int> v(n_max);
  std::vector<double> z(n_max + 1);
  // pass 1: along y within each column
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      f[iy] = marked[static_cast<std::size_t>(ix) * ny + iy] ? 0.0 : unreachable;
    }
    dt_1d(f, ny, d, v, z);
    for (int iy = 0; iy < ny; ++iy) out(ix, iy) = d[iy];
  }
  // pass 2: along x within each row
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) f[ix] = out(ix, iy);
    dt_1d(f, nx, d, v, z);
    for (int ix = 0; ix < nx; ++ix) out(ix, iy) = d[ix];
  }
  return out;
}

}  // namespace

SignedDistanceField compute_sdf(const std::vector<Obstacle>& obstacles,
                                const GridSpec& spec) {
  spec.validate();
  const int nx = spec.dims.x();
  const int ny = spec.dims.y();
  std::vector<std::uint8_t> occupied(static_cast<std::size_t>(nx) * ny, 0);

  // Mark cells whose center lies inside any box; obstacles fully outside the
  // grid simply contribute nothing.
  for (const Obstacle& ob : obstacles) {
    const double lo_x = (ob.center.x() - ob.half_extents.x() - spec.origin.x()) / spec.cell_size - 0.5;
    const double hi_x = (ob.center.x() + ob.half_extents.x() - spec.origin.x()) / spec.cell_size - 0.5;
    const double lo_y = (ob.center.y() - ob.half_extents.y() - spec.origin.y()) / spec.cell_size - 0.5;
    const double hi_y = (ob.center.y() + ob.half_extents.y() - spec.origin.y()) / spec.cell_size - 0.5;
    const int ix0 = std::max(0, static_cast<int>(std::floor(lo_x)));
    const int ix1 = std::min(nx - 1, static_cast<int>(std::ceil(hi_x)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(lo_y)));
    const int iy1 = std::min(ny - 1, static_cast<int>(std::ceil(hi_y)));
    for (int ix = ix0; ix <= ix1; ++ix) {
      for (int iy = iy0; iy <= iy1; ++iy) {
        if (ob.contains(spec.cell_center(ix, iy))) {
          occupied[static_cast<std::size_t>(ix) * ny + iy] = 1;
        }
      }
    }
  }

  // Sentinel larger than any achievable squared distance, so empty site sets
  // are detectable after the transform.
  const double unreachable =
      4.0 * (static_cast<double>(nx) * nx + static_cast<double>(ny) * ny + 1.0);

  std::vector<std::uint8_t> free_cells(occupied.size());
  for (std::size_t i = 0; i < occupied.size(); ++i) free_cells[i] = occupied[i] ? 0 : 1;

  const Eigen::MatrixXd d2_occ = edt_squared(occupied, nx, ny, unreachable);
  const Eigen::MatrixXd d2_free = edt_squared(free_cells, nx, ny, unreachable);

  const double diameter = std::hypot(static_cast<double>(nx), static_cast<double>(ny)) *
                          spec.cell_size;

  Eigen::MatrixXd values(nx, ny);
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      if (occupied[static_cast<std::size_t>(ix) * ny + iy]) {
        const double d2 = d2_free(ix, iy);
        values(ix, iy) = d2 >= unreachable
                             ? -diameter
                             : std::max(-diameter, -std::sqrt(d2) * spec.cell_size);
      } else {
        const double d2 = d2_occ(ix, iy);
        values(ix, iy) = d2 >= unreachable
                             ? diameter
                             : std::min(diameter, std::sqrt(d2) * spec.cell_size);
      }
    }
  }
  return SignedDistanceField(spec, std::move(values));
}

SdfSample sdf_query(const SignedDistanceField& sdf, const Vec2& point) {
  if (!point.allFinite()) {
    throw std::invalid_argument("sdf_query: point must be finite");
  }
  const GridSpec& spec = sdf.spec();
  const int nx = spec.dims.x();
  const int ny = spec.dims.y();

  // Lattice coordinates: integer u lands exactly on a cell center.
  const double u = (point.x() - spec.origin.x()) / spec.cell_size - 0.5;
  const double v = (point.y() - spec.origin.y()) / spec.cell_size - 0.5;
  const bool below_x = u < 0.0;
  const bool above_x = u > nx - 1.0;
  const bool below_y = v < 0.0;
  const bool above_y = v > ny - 1.0;

  const double uc = std::clamp(u, 0.0, static_cast<double>(nx - 1));
  const double vc = std::clamp(v, 0.0, static_cast<double>(ny - 1));
  const int i0 = std::min(static_cast<int>(uc), nx - 2);
  const int j0 = std::min(static_cast<int>(vc), ny - 2);
  const double fx = uc - i0;
  const double fy = vc - j0;

  const double v00 = sdf.value_at(i0, j0);
  const double v10 = sdf.value_at(i0 + 1, j0);
  const double v01 = sdf.value_at(i0, j0 + 1);
  const double v11 = sdf.value_at(i0 + 1, j0 + 1);

  SdfSample out;
  out.distance = v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) +
                 v01 * (1.0 - fx) * fy + v11 * fx * fy;
  out.gradient.x() = ((v10 - v00) * (1.0 - fy) + (v11 - v01) * fy) / spec.cell_size;
  out.gradient.y() = ((v01 - v00) * (1.0 - fx) + (v11 - v10) * fx) / spec.cell_size;

  if (below_x) out.gradient.x() = 1.0;
  if (above_x) out.gradient.x() = -1.0;
  if (below_y) out.gradient.y() = 1.0;
  if (above_y) out.gradient.y() = -1.0;
  return out;
}

namespace {

// Reflect x into [lo, hi], flipping the velocity sign once per bounce.
void reflect_axis(double& x, double& v, double lo, double hi) {
  if (hi <= lo) {
    x = lo;
    return;
  }
  while (x < lo || x > hi) {
    if (x < lo) {
      x = 2.0 * lo - x;
      v = -v;
    } else {
      x = 2.0 * hi - x;
      v = -v;
    }
  }
}

}  // namespace

WorldState step_obstacles_narrow_passage(const WorldState& world,
                                         const MotionParams& params) {
  WorldState out = world;
  for (Obstacle& ob : out.obstacles) {
    if (ob.motion != Obstacle::Motion::PatrolX) continue;
    double x = ob.center.x() + ob.velocity.x() * params.dt;
    double vx = ob.velocity.x();
    reflect_axis(x, vx, ob.patrol_lo, ob.patrol_hi);
    ob.center.x() = x;
    ob.velocity.x() = vx;
  }
  out.time_index = world.time_index + 1;
  return out;
}

WorldState step_obstacles_forest(const WorldState& world, const MotionParams& params,
                                 RngStream& rng) {
  WorldState out = world;
  for (Obstacle& ob : out.obstacles) {
    if (ob.motion != Obstacle::Motion::RandomAccel) continue;
    const double ax = rng.uniform(-params.a_max, params.a_max);
    const double ay = rng.uniform(-params.a_max, params.a_max);
    ob.velocity += Vec2(ax, ay) * params.dt;
    const double speed = ob.velocity.norm();
    if (speed > params.v_max) ob.velocity *= params.v_max / speed;
    for (int axis = 0; axis < 2; ++axis) {
      double x = ob.center(axis) + ob.velocity(axis) * params.dt;
      double vx = ob.velocity(axis);
      // keep the whole box inside the workspace
      const double lo = params.ws_min(axis) + ob.half_extents(axis);
      const double hi = params.ws_max(axis) - ob.half_extents(axis);
      reflect_axis(x, vx, lo, hi);
      ob.center(axis) = x;
      ob.velocity(axis) = vx;
    }
  }
  out.time_index = world.time_index + 1;
  return out;
}

}  // namespace posh
