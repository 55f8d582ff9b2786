#include <doctest.h>

#include <cmath>

#include "mvreg/errors.hpp"
#include "mvreg/lie.hpp"
#include "oracles.hpp"

using namespace mvreg;

TEST_SUITE_BEGIN("lie");

TEST_CASE("so3_exp closed forms") {
  CHECK((so3_exp(Vec3::Zero()) - Mat3::Identity()).norm() == 0.0);

  Mat3 quarter_x;
  quarter_x << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK((so3_exp(Vec3(M_PI / 2, 0, 0)) - quarter_x).norm() < 1e-15);

  CHECK_THROWS_AS(so3_exp(Vec3(std::nan(""), 0, 0)), std::invalid_argument);
}

TEST_CASE("so3 exp/log round trips") {
  RngStream rng(7);
  double worst = 0;
  for (int k = 0; k < 20000; ++k) {
    const Twist xi = oracles::random_twist(rng);
    const Mat3 r = so3_exp(xi.omega);
    CHECK(is_rotation(r));
    worst = std::max(worst, (so3_log(r) - xi.omega).norm());

    const Mat3 r2 = oracles::so3_exp_quat(rng.normal3());
    worst = std::max(worst, (so3_exp(so3_log(r2)) - r2).norm());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("so3_log basics and near-pi branch") {
  CHECK(so3_log(Mat3::Identity()).norm() == 0.0);

  Mat3 pi_x = Vec3(1, -1, -1).asDiagonal();
  const Vec3 w = so3_log(pi_x);
  CHECK(std::abs(w.norm() - M_PI) < 1e-12);
  CHECK(std::abs(std::abs(w.x()) - M_PI) < 1e-12);
  CHECK(std::abs(w.y()) < 1e-12);
  CHECK(std::abs(w.z()) < 1e-12);

  // Angles just below pi stay on the principal branch and round trip.
  RngStream rng(11);
  for (int k = 0; k < 200; ++k) {
    Vec3 axis = rng.normal3().normalized();
    const Vec3 omega = (M_PI - 1e-3) * axis;
    const Vec3 back = so3_log(so3_exp(omega));
    CHECK((back - omega).norm() < 1e-9);
  }

  // The dedicated branch engages inside (pi - 1e-4, pi] and stays accurate.
  for (int k = 0; k < 200; ++k) {
    Vec3 axis = rng.normal3().normalized();
    const double theta = M_PI - 1e-5 * (1.0 + rng.uniform() * 9.0);
    const Vec3 omega = theta * axis;
    const Vec3 back = so3_log(so3_exp(omega));
    CHECK((back - omega).norm() < 1e-9);
  }

  Mat3 bad = Mat3::Identity();
  bad(0, 0) = 1.5;
  CHECK_THROWS_AS(so3_log(bad), std::invalid_argument);
}

TEST_CASE("se3_exp pure translation") {
  const RigidTransform T = se3_exp(Twist{Vec3::Zero(), Vec3(1, 2, 3)});
  CHECK((T.R - Mat3::Identity()).norm() == 0.0);
  CHECK((T.t - Vec3(1, 2, 3)).norm() == 0.0);

  const RigidTransform id = se3_exp(Twist{});
  CHECK((id.R - Mat3::Identity()).norm() == 0.0);
  CHECK(id.t.norm() == 0.0);
}

TEST_CASE("se3 round trips against the quadrature oracle") {
  RngStream rng(13);
  double worst = 0, worst_oracle = 0;
  for (int k = 0; k < 5000; ++k) {
    const Twist xi = oracles::random_twist(rng);
    const RigidTransform T = se3_exp(xi);
    const Twist back = se3_log(T);
    worst = std::max(worst, (back.vec() - xi.vec()).norm());

    // Independent route: quaternion rotation + Simpson-quadrature Jacobian.
    const RigidTransform T2 = oracles::se3_exp_oracle(xi);
    worst_oracle = std::max(worst_oracle, (T.R - T2.R).norm() + (T.t - T2.t).norm());
  }
  CHECK(worst < 1e-9);
  CHECK(worst_oracle < 1e-9);
}

TEST_CASE("se3_log rejects angles at pi") {
  RigidTransform T;
  T.R = Vec3(1, -1, -1).asDiagonal();
  T.t = Vec3(0.5, 0, 0);
  CHECK_THROWS_AS(se3_log(T), std::domain_error);

  try {
    se3_log(T, 4);
    CHECK(false);
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("index 4") != std::string::npos);
  }
}

TEST_CASE("group operations") {
  RngStream rng(17);
  for (int k = 0; k < 1000; ++k) {
    const RigidTransform t1 = oracles::random_pose(rng);
    const RigidTransform t2 = oracles::random_pose(rng);
    const RigidTransform t3 = oracles::random_pose(rng);
    const Vec3 p = 5.0 * rng.normal3();

    const RigidTransform ti = compose(t1, inverse(t1));
    CHECK((ti.R - Mat3::Identity()).norm() < 1e-12);
    CHECK(ti.t.norm() < 1e-12);

    CHECK((compose(t1, t2).apply(p) - t1.apply(t2.apply(p))).norm() < 1e-10);

    const RigidTransform left = compose(compose(t1, t2), t3);
    const RigidTransform right = compose(t1, compose(t2, t3));
    CHECK((left.R - right.R).norm() < 1e-10);
    CHECK((left.t - right.t).norm() < 1e-10);
  }
  CHECK((RigidTransform::identity().apply(Vec3(1, 2, 3)) - Vec3(1, 2, 3)).norm() == 0.0);
}

TEST_CASE("project_to_so3 fixed points and scale invariance") {
  RngStream rng(19);
  for (int k = 0; k < 200; ++k) {
    const Mat3 r = oracles::so3_exp_quat(rng.normal3());
    CHECK((project_to_so3(r) - r).norm() < 1e-12);
    CHECK((project_to_so3(2.0 * r) - r).norm() < 1e-12);
  }
}

TEST_CASE("project_to_so3 beats a random-rotation search") {
  RngStream rng(23);
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = rng.normal();
  const Mat3 best = project_to_so3(m);
  const double best_dist = (m - best).norm();
  for (int k = 0; k < 10000; ++k) {
    const Mat3 cand = oracles::so3_exp_quat(M_PI * rng.normal3().normalized() * rng.uniform());
    CHECK((m - cand).norm() >= best_dist - 1e-12);
  }
  CHECK(is_rotation(best));
}

TEST_CASE("project_to_so3 rejects rank-deficient input") {
  Mat3 m = Mat3::Zero();
  m(0, 0) = 1;
  m(1, 1) = 1;
  CHECK_THROWS_AS(project_to_so3(m), DegenerateInputError);
}

TEST_CASE("pose_interpolate endpoints and midpoint") {
  RngStream rng(29);
  const RigidTransform t0 = oracles::random_pose(rng);
  const RigidTransform tp = oracles::random_pose(rng);

  const RigidTransform at1 = pose_interpolate(1.0, t0, tp);
  CHECK((at1.R - t0.R).norm() == 0.0);
  CHECK((at1.t - t0.t).norm() == 0.0);

  const RigidTransform at0 = pose_interpolate(0.0, t0, tp);
  CHECK((at0.R - tp.R).norm() == 0.0);
  CHECK((at0.t - tp.t).norm() == 0.0);

  RigidTransform z90;
  z90.R = so3_exp(Vec3(0, 0, M_PI / 2));
  const RigidTransform mid = pose_interpolate(0.5, RigidTransform::identity(), z90);
  CHECK((mid.R - so3_exp(Vec3(0, 0, M_PI / 4))).norm() < 1e-12);

  CHECK_THROWS_AS(pose_interpolate(1.5, t0, tp), std::invalid_argument);

  RigidTransform opposite;
  opposite.R = Vec3(1, -1, -1).asDiagonal();  // relative angle exactly pi
  CHECK_THROWS_AS(pose_interpolate(0.5, RigidTransform::identity(), opposite),
                  std::domain_error);
}

TEST_CASE("pose_interpolate traces a geodesic") {
  RngStream rng(31);
  for (int k = 0; k < 200; ++k) {
    const RigidTransform t0 = oracles::random_pose(rng, 1.0, 2.0);
    const RigidTransform tp = oracles::random_pose(rng, 1.0, 2.0);
    const double total = relative_rotation_angle(t0, tp);
    const double w = rng.uniform();
    const RigidTransform mid = pose_interpolate(w, t0, tp);
    CHECK(std::abs(relative_rotation_angle(t0, mid) - (1.0 - w) * total) < 1e-9);
  }
}

TEST_CASE("sample_random_pose determinism and moments") {
  RngStream a(101), b(101);
  const RigidTransform ta = sample_random_pose(a, 0.3, 0.7);
  const RigidTransform tb = sample_random_pose(b, 0.3, 0.7);
  CHECK((ta.R - tb.R).norm() == 0.0);
  CHECK((ta.t - tb.t).norm() == 0.0);

  RngStream zero(5);
  const RigidTransform id = sample_random_pose(zero, 0.0, 0.0);
  CHECK((id.R - Mat3::Identity()).norm() == 0.0);
  CHECK(id.t.norm() == 0.0);

  RngStream rng(7);
  Vec3 sq = Vec3::Zero();
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    const Vec3 w = so3_log(sample_random_pose(rng, 0.1, 0.0).R);
    sq += w.cwiseProduct(w);
  }
  for (int a3 = 0; a3 < 3; ++a3) {
    const double stdev = std::sqrt(sq(a3) / n);
    CHECK(stdev == doctest::Approx(0.1).epsilon(0.05));
  }

  CHECK_THROWS_AS(sample_random_pose(rng, -1.0, 0.0), std::invalid_argument);
}

TEST_SUITE_END();
