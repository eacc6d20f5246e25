#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "posh/types.hpp"

namespace posh {

template <typename Scalar>
using Mat4X = Eigen::Matrix<Scalar, 4, 4>;

// Constant-velocity motion prior: positions integrate velocity, velocities
// are driven by white-noise acceleration with spectral density qc per axis.

// State transition over dt.
template <typename Scalar>
Mat4X<Scalar> transition_matrix(Scalar dt) {
  if (!(dt >= Scalar(0))) {
    throw std::invalid_argument("transition_matrix: dt must be >= 0");
  }
  Mat4X<Scalar> phi = Mat4X<Scalar>::Identity();
  phi(0, 2) = dt;
  phi(1, 3) = dt;
  return phi;
}

// Covariance accumulated over dt by the white-noise acceleration.
template <typename Scalar>
Mat4X<Scalar> process_noise_cov(Scalar dt, Scalar qc) {
  if (!(dt > Scalar(0))) {
    throw std::invalid_argument("process_noise_cov: dt must be > 0");
  }
  if (!(qc > Scalar(0))) {
    throw std::invalid_argument("process_noise_cov: qc must be > 0");
  }
  const Scalar q_pp = qc * dt * dt * dt / Scalar(3);
  const Scalar q_pv = qc * dt * dt / Scalar(2);
  const Scalar q_vv = qc * dt;
  Mat4X<Scalar> q = Mat4X<Scalar>::Zero();
  using M2 = Eigen::Matrix<Scalar, 2, 2>;
  q.template topLeftCorner<2, 2>() = q_pp * M2::Identity();
  q.template topRightCorner<2, 2>() = q_pv * M2::Identity();
  q.template bottomLeftCorner<2, 2>() = q_pv * M2::Identity();
  q.template bottomRightCorner<2, 2>() = q_vv * M2::Identity();
  return q;
}

// Closed-form inverse of process_noise_cov.
template <typename Scalar>
Mat4X<Scalar> process_noise_info(Scalar dt, Scalar qc) {
  if (!(dt > Scalar(0))) {
    throw std::invalid_argument("process_noise_info: dt must be > 0");
  }
  if (!(qc > Scalar(0))) {
    throw std::invalid_argument("process_noise_info: qc must be > 0");
  }
  const Scalar i_pp = Scalar(12) / (qc * dt * dt * dt);
  const Scalar i_pv = Scalar(-6) / (qc * dt * dt);
  const Scalar i_vv = Scalar(4) / (qc * dt);
  Mat4X<Scalar> info = Mat4X<Scalar>::Zero();
  using M2 = Eigen::Matrix<Scalar, 2, 2>;
  info.template topLeftCorner<2, 2>() = i_pp * M2::Identity();
  info.template topRightCorner<2, 2>() = i_pv * M2::Identity();
  info.template bottomLeftCorner<2, 2>() = i_pv * M2::Identity();
  info.template bottomRightCorner<2, 2>() = i_vv * M2::Identity();
  return info;
}

// Deviation of xb from the noiseless propagation of xa, with the precision
// that scores it and the Jacobians w.r.t. both endpoints.
struct GpPriorEval {
  Vec4 residual;
  Mat4 precision;
  Mat4 jacobian_a;
  Mat4 jacobian_b;

  double error() const { return 0.5 * residual.dot(precision * residual); }
};

inline GpPriorEval gp_prior_residual(const SupportState& xa, const SupportState& xb,
                                     double dt, double qc) {
  GpPriorEval out;
  const Mat4 phi = transition_matrix(dt);
  out.residual = phi * xa.vector() - xb.vector();
  out.precision = process_noise_info(dt, qc);
  out.jacobian_a = phi;
  out.jacobian_b = -Mat4::Identity();
  return out;
}

// Posterior mean state at tau in [0, dt] between two support states, plus
// the interpolation weights (which double as Jacobians of the interpolated
// state w.r.t. the endpoints).
struct GpInterpEval {
  SupportState state;
  Mat4 jacobian_a;  // weight on xa
  Mat4 jacobian_b;  // weight on xb
};

inline GpInterpEval gp_interpolate(const SupportState& xa, const SupportState& xb,
                                   double tau, double dt, double qc) {
  if (!(dt > 0.0)) throw std::invalid_argument("gp_interpolate: dt must be > 0");
  if (!(tau >= 0.0 && tau <= dt)) {
    throw std::invalid_argument("gp_interpolate: tau must lie in [0, dt]");
  }
  GpInterpEval out;
  if (tau == 0.0) {
    out.jacobian_a = Mat4::Identity();
    out.jacobian_b = Mat4::Zero();
    out.state = xa;
    return out;
  }
  const Mat4 psi = process_noise_cov(tau, qc) * transition_matrix(dt - tau).transpose() *
                   process_noise_info(dt, qc);
  const Mat4 lambda = transition_matrix(tau) - psi * transition_matrix(dt);
  out.jacobian_a = lambda;
  out.jacobian_b = psi;
  out.state = SupportState::from_vector(lambda * xa.vector() + psi * xb.vector());
  return out;
}

}  // namespace posh
