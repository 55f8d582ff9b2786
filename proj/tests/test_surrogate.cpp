#include <doctest.h>

#include <cmath>

#include "mvreg/diffusion.hpp"
#include "mvreg/errors.hpp"
#include "mvreg/surrogate.hpp"
#include "oracles.hpp"

using namespace mvreg;

namespace {

std::vector<Vec3> random_points(RngStream& rng, int n, double scale = 2.0) {
  std::vector<Vec3> pts(n);
  for (int k = 0; k < n; ++k) pts[k] = scale * rng.normal3();
  return pts;
}

Scene tiny_scene(int n, std::uint64_t seed, double noise = 0.0) {
  SceneConfig cfg;
  cfg.n_scans = n;
  cfg.world_points = 300;
  cfg.view_radius = 7.0;
  cfg.point_noise = noise;
  cfg.overlap_threshold = 0.05;
  RngStream rng(seed);
  return generate_scene(cfg, rng);
}

}  // namespace

TEST_SUITE_BEGIN("surrogate");

TEST_CASE("kabsch_align exact recovery") {
  RngStream rng(3);
  const auto p = random_points(rng, 40);
  const std::vector<double> w(p.size(), 1.0);

  const RigidTransform same = kabsch_align(p, p, w);
  CHECK((same.R - Mat3::Identity()).norm() < 1e-12);
  CHECK(same.t.norm() < 1e-12);

  const RigidTransform truth = oracles::random_pose(rng, 2.0, 3.0);
  std::vector<Vec3> q(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) q[k] = truth.apply(p[k]);
  const RigidTransform got = kabsch_align(p, q, w);
  CHECK((got.R - truth.R).norm() < 1e-10);
  CHECK((got.t - truth.t).norm() < 1e-10);
}

TEST_CASE("kabsch_align agrees with the Horn quaternion solver under noise") {
  RngStream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_points(rng, 30);
    std::vector<double> w(p.size());
    for (auto& x : w) x = 0.5 + rng.uniform();
    const RigidTransform truth = oracles::random_pose(rng, 2.0, 3.0);
    std::vector<Vec3> q(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) q[k] = truth.apply(p[k]) + 0.01 * rng.normal3();

    const RigidTransform a = kabsch_align(p, q, w);
    const RigidTransform b = oracles::horn_align(p, q, w);
    CHECK((a.R - b.R).norm() < 1e-8);
    CHECK((a.t - b.t).norm() < 1e-8);
  }
}

TEST_CASE("kabsch_align is left-equivariant") {
  RngStream rng(7);
  const auto p = random_points(rng, 25);
  const auto q = random_points(rng, 25);
  const std::vector<double> w(p.size(), 1.0);
  const RigidTransform base = kabsch_align(p, q, w);
  for (int k = 0; k < 20; ++k) {
    const RigidTransform g = oracles::random_pose(rng, 2.0, 3.0);
    std::vector<Vec3> gq(q.size());
    for (std::size_t m = 0; m < q.size(); ++m) gq[m] = g.apply(q[m]);
    const RigidTransform got = kabsch_align(p, gq, w);
    const RigidTransform want = compose(g, base);
    CHECK((got.R - want.R).norm() < 1e-10);
    CHECK((got.t - want.t).norm() < 1e-10);
  }
}

TEST_CASE("kabsch_align degenerate inputs") {
  std::vector<Vec3> line{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)};
  const std::vector<double> w(line.size(), 1.0);
  CHECK_THROWS_AS(kabsch_align(line, line, w), DegenerateInputError);

  std::vector<Vec3> two{Vec3(0, 0, 0), Vec3(1, 1, 1)};
  CHECK_THROWS_AS(kabsch_align(two, two, std::vector<double>(2, 1.0)), DegenerateInputError);
}

TEST_CASE("oracle_estimate exactness, determinism, and noise moments") {
  RngStream rng(11);
  PoseSet gt(4), current(4);
  for (int i = 0; i < 4; ++i) {
    gt[i] = oracles::random_pose(rng, 1.5, 2.0);
    current[i] = oracles::random_pose(rng, 1.5, 2.0);
  }

  RngStream d0(0);
  const SurrogateOutput same = oracle_estimate(gt, gt, 0.0, d0);
  for (int i = 0; i < 4; ++i) {
    CHECK((same.residuals[i].R - Mat3::Identity()).norm() < 1e-12);
    CHECK(same.residuals[i].t.norm() < 1e-12);
  }

  RngStream d1(0);
  const SurrogateOutput exact = oracle_estimate(gt, current, 0.0, d1);
  for (int i = 0; i < 4; ++i) {
    const RigidTransform recovered = compose(exact.residuals[i], current[i]);
    CHECK((recovered.R - gt[i].R).norm() < 1e-12);
    CHECK((recovered.t - gt[i].t).norm() < 1e-12);
  }

  // noise twist component stdev ~ noise_scale
  PoseSet g1(1), c1(1);
  g1[0] = gt[0];
  c1[0] = current[0];
  const RigidTransform exact_res = compose(g1[0], inverse(c1[0]));
  RngStream noise_rng(13);
  const int trials = 10000;
  Vec6 sq = Vec6::Zero();
  for (int k = 0; k < trials; ++k) {
    const SurrogateOutput noisy = oracle_estimate(g1, c1, 0.05, noise_rng);
    const Vec6 dev = se3_log(compose(noisy.residuals[0], inverse(exact_res))).vec();
    sq += dev.cwiseProduct(dev);
  }
  for (int c = 0; c < 6; ++c)
    CHECK(std::sqrt(sq(c) / trials) == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("oracle surrogate makes the t = 1 reverse step exact") {
  const Scene scene = tiny_scene(3, 41);
  RngStream prior_rng(1);
  PoseSet current(3);
  for (int i = 0; i < 3; ++i)
    current[i] = compose(sample_random_pose(prior_rng, 0.3, 0.5), scene.gt[i]);

  const NoiseSchedule s = cosine_schedule(100);
  RngStream d(0);
  const OracleSurrogate oracle(0.0);
  const SurrogateOutput est = oracle.estimate(scene, current, {}, 1, d);
  const PoseSet out = reverse_step(est.residuals, current, current, coeffs_at(s, 1), false, d);
  for (int i = 0; i < 3; ++i) {
    CHECK((out[i].R - scene.gt[i].R).norm() < 1e-9);
    CHECK((out[i].t - scene.gt[i].t).norm() < 1e-9);
  }
}

TEST_CASE("kabsch surrogate identity residuals at gt and exact residuals when perturbed") {
  const Scene scene = tiny_scene(4, 42, 0.0);
  const Correspondences corr = id_correspondences(scene);

  const auto at_gt = kabsch_surrogate_estimate(transform_scene(scene, scene.gt), corr, scene.world);
  CHECK(at_gt.degenerate_scans.empty());
  for (int i = 0; i < 4; ++i) {
    CHECK((at_gt.residuals[i].R - Mat3::Identity()).norm() < 1e-10);
    CHECK(at_gt.residuals[i].t.norm() < 1e-10);
  }

  RngStream rng(7);
  PoseSet perturbed(4);
  for (int i = 0; i < 4; ++i)
    perturbed[i] = compose(sample_random_pose(rng, 0.2, 0.4), scene.gt[i]);
  const auto est =
      kabsch_surrogate_estimate(transform_scene(scene, perturbed), corr, scene.world);
  for (int i = 0; i < 4; ++i) {
    const RigidTransform want = compose(scene.gt[i], inverse(perturbed[i]));
    CHECK((est.residuals[i].R - want.R).norm() < 1e-9);
    CHECK((est.residuals[i].t - want.t).norm() < 1e-9);
  }
}

TEST_CASE("kabsch surrogate degenerate-scan policy") {
  Scene scene = tiny_scene(2, 43);
  // Collapse scan 1 onto a line so Procrustes degenerates.
  for (std::size_t k = 0; k < scene.scans[1].size(); ++k)
    scene.scans[1].points[k] = Vec3(static_cast<double>(k), 0, 0);
  const Correspondences corr = id_correspondences(scene);
  const auto transformed = transform_scene(scene, scene.gt);

  const auto fallback = kabsch_surrogate_estimate(transformed, corr, scene.world,
                                                  DegeneratePolicy::IdentityResidual);
  REQUIRE(fallback.degenerate_scans.size() == 1);
  CHECK(fallback.degenerate_scans[0] == 1);
  CHECK((fallback.residuals[1].R - Mat3::Identity()).norm() == 0.0);

  CHECK_THROWS_AS(
      kabsch_surrogate_estimate(transformed, corr, scene.world, DegeneratePolicy::Throw),
      DegenerateInputError);
}

TEST_CASE("surrogates are stateless: identical inputs give identical outputs") {
  const Scene scene = tiny_scene(3, 44, 0.005);
  RngStream rng(9);
  PoseSet current(3);
  for (int i = 0; i < 3; ++i)
    current[i] = compose(sample_random_pose(rng, 0.2, 0.3), scene.gt[i]);
  const auto transformed = transform_scene(scene, current);

  const KabschSurrogate surrogate;
  RngStream d1(0), d2(0);
  const auto a = surrogate.estimate(scene, current, transformed, 10, d1);
  const auto b = surrogate.estimate(scene, current, transformed, 10, d2);
  for (int i = 0; i < 3; ++i) {
    CHECK((a.residuals[i].R - b.residuals[i].R).norm() == 0.0);
    CHECK((a.residuals[i].t - b.residuals[i].t).norm() == 0.0);
  }
}

TEST_SUITE_END();
