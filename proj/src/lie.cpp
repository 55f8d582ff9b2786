#include "mvreg/lie.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "mvreg/errors.hpp"

namespace mvreg {

namespace {
constexpr double kSmallAngle = 1e-8;   // below this, second-order Taylor
constexpr double kNearPi = 1e-4;       // log switches to the R+I axis branch
constexpr double kLogDomainGuard = 1e-6;  // se3_log rejects angles >= pi - guard

double clamp1(double x) { return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x); }
}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<     0, -v.z(),  v.y(),
       v.z(),      0, -v.x(),
      -v.y(),  v.x(),      0;
  // clang-format on
  return s;
}

Vec3 unskew(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

void check_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) throw std::invalid_argument("rotation matrix has non-finite entries");
  const double ortho = (r.transpose() * r - Mat3::Identity()).norm();
  const double det_dev = std::abs(r.determinant() - 1.0);
  if (ortho > tol || det_dev > tol) {
    throw std::invalid_argument("matrix violates rotation invariants (orthonormality dev " +
                                std::to_string(ortho) + ", det dev " + std::to_string(det_dev) +
                                ")");
  }
}

bool is_rotation(const Mat3& r, double tol) {
  return r.allFinite() && (r.transpose() * r - Mat3::Identity()).norm() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

Mat3 so3_exp(const Vec3& omega) {
  if (!omega.allFinite()) throw std::invalid_argument("so3_exp: non-finite input");
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w = skew(omega);
  double a, b;  // R = I + a*w + b*w^2
  if (theta < kSmallAngle) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * w + b * (w * w);
}

Vec3 so3_log(const Mat3& r) {
  check_rotation(r, 1e-6);
  const Vec3 s = unskew(r - r.transpose()) * 0.5;  // sin(theta) * axis
  const double cos_theta = clamp1((r.trace() - 1.0) * 0.5);
  const double sin_theta = s.norm();
  const double theta = std::atan2(sin_theta, cos_theta);

  if (theta < kSmallAngle) {
    return s * (1.0 + theta * theta / 6.0);
  }
  if (theta > M_PI - kNearPi) {
    // R + I -> 2 axis axis^T as theta -> pi. Working with the symmetric part
    // (R + R^T)/2 - cos(theta) I = (1 - cos(theta)) axis axis^T drops the
    // sin(theta) skew term, so the largest column gives the axis without an
    // O(pi - theta) tilt.
    const Mat3 b = 0.5 * (r + r.transpose()) - cos_theta * Mat3::Identity();
    int col = 0;
    b.colwise().norm().maxCoeff(&col);
    Vec3 axis = b.col(col).normalized();
    if (axis.dot(s) < 0) axis = -axis;  // keep the principal (|w| <= pi) branch
    return theta * axis;
  }
  return (theta / sin_theta) * s;
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w = skew(omega);
  double a, b;  // V = I + a*w + b*w^2
  if (theta < kSmallAngle) {
    a = 0.5 - theta2 / 24.0;
    b = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    a = (1.0 - std::cos(theta)) / theta2;
    b = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return Mat3::Identity() + a * w + b * (w * w);
}

Mat3 so3_left_jacobian_inv(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 w = skew(omega);
  double b;  // V^-1 = I - w/2 + b*w^2
  if (theta < kSmallAngle) {
    b = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    // 1/theta^2 - cot(theta/2)/(2 theta); the half-angle form avoids the
    // (1 + cos)/sin cancellation near pi.
    b = 1.0 / theta2 - std::cos(0.5 * theta) / (2.0 * theta * std::sin(0.5 * theta));
  }
  return Mat3::Identity() - 0.5 * w + b * (w * w);
}

RigidTransform se3_exp(const Twist& xi) {
  if (!xi.omega.allFinite() || !xi.v.allFinite())
    throw std::invalid_argument("se3_exp: non-finite input");
  RigidTransform T;
  T.R = so3_exp(xi.omega);
  T.t = so3_left_jacobian(xi.omega) * xi.v;
  return T;
}

Twist se3_log(const RigidTransform& T, int index) {
  const Vec3 omega = so3_log(T.R);
  const double theta = omega.norm();
  if (theta >= M_PI - kLogDomainGuard) {
    std::string msg = "se3_log: rotation angle " + std::to_string(theta) + " within 1e-6 of pi";
    if (index >= 0) msg += " (transform index " + std::to_string(index) + ")";
    throw std::domain_error(msg);
  }
  Twist xi;
  xi.omega = omega;
  xi.v = so3_left_jacobian_inv(omega) * T.t;
  return xi;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform c;
  c.R = a.R * b.R;
  c.t = a.R * b.t + a.t;
  return c;
}

RigidTransform inverse(const RigidTransform& T) {
  RigidTransform inv;
  inv.R = T.R.transpose();
  inv.t = -(inv.R * T.t);
  return inv;
}

Mat3 project_to_so3(const Mat3& m) {
  if (!m.allFinite()) throw std::invalid_argument("project_to_so3: non-finite input");
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(2) <= 1e-12) {
    throw DegenerateInputError("project_to_so3: rank-deficient input (sigma_min " +
                               std::to_string(svd.singularValues()(2)) + ")");
  }
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Vec3 d(1.0, 1.0, (u * v.transpose()).determinant());
  return u * d.asDiagonal() * v.transpose();
}

RigidTransform pose_interpolate(double w, const RigidTransform& T0, const RigidTransform& Tprior) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("pose_interpolate: w outside [0, 1]");
  if (w == 1.0) return T0;
  if (w == 0.0) return Tprior;
  const Twist rel = se3_log(compose(Tprior, inverse(T0)));
  const Twist scaled{(1.0 - w) * rel.omega, (1.0 - w) * rel.v};
  return compose(se3_exp(scaled), T0);
}

RigidTransform sample_random_pose(RngStream& rng, double rot_scale, double trans_scale) {
  if (rot_scale < 0 || trans_scale < 0)
    throw std::invalid_argument("sample_random_pose: negative scale");
  Twist xi;
  xi.omega = rot_scale * rng.normal3();
  xi.v = trans_scale * rng.normal3();
  return se3_exp(xi);
}

double relative_rotation_angle(const RigidTransform& a, const RigidTransform& b) {
  const Mat3 rel = a.R.transpose() * b.R;
  // atan2 form stays well-conditioned at both ends of [0, pi].
  const double sin_theta = (unskew(rel - rel.transpose()) * 0.5).norm();
  return std::atan2(sin_theta, clamp1((rel.trace() - 1.0) * 0.5));
}

}  // namespace mvreg
