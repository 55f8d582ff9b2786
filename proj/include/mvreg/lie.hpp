#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "mvreg/rng.hpp"

namespace mvreg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Rotation matrices are plain Mat3 values expected to satisfy
//   |R^T R - I|_F <= 1e-9  and  det(R) = 1 +- 1e-9.
// Construction goes through so3_exp / project_to_so3, which guarantee both;
// check_rotation validates inputs coming from elsewhere.

// Lie-algebra coordinate of an SE(3) element. Serialization and 6-vector
// packing always use the (omega, v) order.
struct Twist {
  Vec3 omega = Vec3::Zero();  // rotational part, radians
  Vec3 v = Vec3::Zero();      // translational part, meters

  Vec6 vec() const {
    Vec6 x;
    x << omega, v;
    return x;
  }
  static Twist from_vec(const Vec6& x) { return Twist{x.head<3>(), x.tail<3>()}; }
};

struct RigidTransform {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  static RigidTransform identity() { return RigidTransform{}; }
  Vec3 apply(const Vec3& p) const { return R * p + t; }
};

// Ordered tuple of per-scan global poses; the state diffused and denoised.
struct PoseSet {
  std::vector<RigidTransform> poses;

  PoseSet() = default;
  explicit PoseSet(std::size_t n) : poses(n) {}
  std::size_t size() const { return poses.size(); }
  RigidTransform& operator[](std::size_t i) { return poses[i]; }
  const RigidTransform& operator[](std::size_t i) const { return poses[i]; }
};

Mat3 skew(const Vec3& v);
Vec3 unskew(const Mat3& m);

// Frobenius deviation from orthonormality + determinant; throws
// std::invalid_argument when beyond tol (default matches so3_log's contract).
void check_rotation(const Mat3& r, double tol = 1e-6);
bool is_rotation(const Mat3& r, double tol = 1e-9);

// Rodrigues formula; second-order Taylor branch below 1e-8 rad.
Mat3 so3_exp(const Vec3& omega);

// Principal axis-angle vector, |result| <= pi. Near-pi rotations take a
// dedicated branch extracting the axis from the largest column of R + I.
Vec3 so3_log(const Mat3& r);

// Left Jacobian V(omega) coupling translation into the SE(3) exponential,
// and its closed-form inverse.
Mat3 so3_left_jacobian(const Vec3& omega);
Mat3 so3_left_jacobian_inv(const Vec3& omega);

RigidTransform se3_exp(const Twist& xi);

// Throws std::domain_error when the rotation angle is within 1e-6 of pi;
// `index` >= 0 names the offending transform in pose-set contexts.
Twist se3_log(const RigidTransform& T, int index = -1);

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform inverse(const RigidTransform& T);

// Nearest rotation in Frobenius norm: U diag(1, 1, det(U V^T)) V^T.
// Throws DegenerateInputError when the smallest singular value is <= 1e-12.
Mat3 project_to_so3(const Mat3& m);

// Geodesic interpolation Exp((1 - w) Log(Tprior T0^-1)) T0.
// w = 1 returns T0 exactly, w = 0 returns Tprior exactly.
RigidTransform pose_interpolate(double w, const RigidTransform& T0, const RigidTransform& Tprior);

// Exp of a twist with omega ~ N(0, rot_scale^2 I), v ~ N(0, trans_scale^2 I).
RigidTransform sample_random_pose(RngStream& rng, double rot_scale, double trans_scale);

// Rotation angle of Ta^-1 Tb in radians (geodesic distance on SO(3)).
double relative_rotation_angle(const RigidTransform& a, const RigidTransform& b);

}  // namespace mvreg
