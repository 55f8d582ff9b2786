// Independent reference implementations used only by tests. These follow
// different algorithmic routes than the library (quaternions instead of
// Rodrigues, Simpson quadrature instead of closed-form Jacobians, Horn's
// quaternion method instead of SVD Procrustes) so agreement between the two
// is a meaningful check.
#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "mvreg/lie.hpp"
#include "mvreg/rng.hpp"

namespace oracles {

using mvreg::Mat3;
using mvreg::RigidTransform;
using mvreg::Twist;
using mvreg::Vec3;

inline Mat3 so3_exp_quat(const Vec3& omega) {
  const double theta = omega.norm();
  if (theta == 0) return Mat3::Identity();
  return Eigen::AngleAxisd(theta, omega / theta).toRotationMatrix();
}

inline Vec3 so3_log_quat(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

// V(omega) = int_0^1 exp(s * hat(omega)) ds by composite Simpson.
inline Mat3 left_jacobian_quadrature(const Vec3& omega, int intervals = 512) {
  Mat3 acc = Mat3::Zero();
  const double h = 1.0 / intervals;
  for (int k = 0; k < intervals; ++k) {
    const double a = k * h;
    acc += (h / 6.0) * (so3_exp_quat(a * omega) + 4.0 * so3_exp_quat((a + 0.5 * h) * omega) +
                        so3_exp_quat((a + h) * omega));
  }
  return acc;
}

inline RigidTransform se3_exp_oracle(const Twist& xi) {
  RigidTransform T;
  T.R = so3_exp_quat(xi.omega);
  T.t = left_jacobian_quadrature(xi.omega) * xi.v;
  return T;
}

inline Twist se3_log_oracle(const RigidTransform& T) {
  Twist xi;
  xi.omega = so3_log_quat(T.R);
  xi.v = left_jacobian_quadrature(xi.omega).inverse() * T.t;
  return xi;
}

// Horn's closed-form absolute orientation via the quaternion eigenvector of
// the 4x4 cross-covariance form; maps p -> q.
inline RigidTransform horn_align(const std::vector<Vec3>& p, const std::vector<Vec3>& q,
                                 const std::vector<double>& w) {
  double wsum = 0;
  Vec3 p_bar = Vec3::Zero(), q_bar = Vec3::Zero();
  for (std::size_t k = 0; k < p.size(); ++k) {
    wsum += w[k];
    p_bar += w[k] * p[k];
    q_bar += w[k] * q[k];
  }
  p_bar /= wsum;
  q_bar /= wsum;

  Mat3 s = Mat3::Zero();
  for (std::size_t k = 0; k < p.size(); ++k)
    s += w[k] * (p[k] - p_bar) * (q[k] - q_bar).transpose();

  Eigen::Matrix4d n;
  const double sxx = s(0, 0), sxy = s(0, 1), sxz = s(0, 2);
  const double syx = s(1, 0), syy = s(1, 1), syz = s(1, 2);
  const double szx = s(2, 0), szy = s(2, 1), szz = s(2, 2);
  n << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
       syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
       szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
       sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(n);
  const Eigen::Vector4d qv = eig.eigenvectors().col(3);  // largest eigenvalue
  const Eigen::Quaterniond quat(qv(0), qv(1), qv(2), qv(3));

  RigidTransform T;
  T.R = quat.normalized().toRotationMatrix();
  T.t = q_bar - T.R * p_bar;
  return T;
}

// Random twist with rotation angle bounded away from pi.
inline Twist random_twist(mvreg::RngStream& rng, double max_angle = M_PI - 1e-3,
                          double trans_scale = 10.0) {
  Vec3 axis = rng.normal3();
  while (axis.norm() < 1e-12) axis = rng.normal3();
  axis.normalize();
  Twist xi;
  xi.omega = rng.uniform() * max_angle * axis;
  xi.v = trans_scale * Vec3(rng.uniform() * 2 - 1, rng.uniform() * 2 - 1, rng.uniform() * 2 - 1);
  return xi;
}

inline RigidTransform random_pose(mvreg::RngStream& rng, double max_angle = M_PI - 1e-3,
                                  double trans_scale = 10.0) {
  return se3_exp_oracle(random_twist(rng, max_angle, trans_scale));
}

}  // namespace oracles
