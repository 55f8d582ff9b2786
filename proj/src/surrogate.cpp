#include "mvreg/surrogate.hpp"

#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>

#include "mvreg/errors.hpp"

namespace mvreg {

Correspondences id_correspondences(const Scene& scene) {
  Correspondences corr;
  corr.per_scan.resize(scene.scans.size());
  for (std::size_t i = 0; i < scene.scans.size(); ++i) {
    const PointCloud& scan = scene.scans[i];
    corr.per_scan[i].reserve(scan.size());
    for (int k = 0; k < static_cast<int>(scan.size()); ++k)
      corr.per_scan[i].push_back({k, scan.ids[k], 1.0});
  }
  return corr;
}

RigidTransform kabsch_align(const std::vector<Vec3>& p, const std::vector<Vec3>& q,
                            const std::vector<double>& w) {
  if (p.size() != q.size() || p.size() != w.size())
    throw std::invalid_argument("kabsch_align: size mismatch");
  if (p.size() < 3) throw DegenerateInputError("kabsch_align: fewer than 3 pairs");

  double wsum = 0;
  Vec3 p_bar = Vec3::Zero(), q_bar = Vec3::Zero();
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (w[k] < 0) throw std::invalid_argument("kabsch_align: negative weight");
    wsum += w[k];
    p_bar += w[k] * p[k];
    q_bar += w[k] * q[k];
  }
  if (wsum <= 0) throw DegenerateInputError("kabsch_align: zero total weight");
  p_bar /= wsum;
  q_bar /= wsum;

  Mat3 h = Mat3::Zero();
  for (std::size_t k = 0; k < p.size(); ++k)
    h += w[k] * (p[k] - p_bar) * (q[k] - q_bar).transpose();

  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues()(1) <= 1e-10)
    throw DegenerateInputError("kabsch_align: collinear point sets (sigma_2 <= 1e-10)");

  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Vec3 d(1.0, 1.0, (v * u.transpose()).determinant());
  RigidTransform T;
  T.R = v * d.asDiagonal() * u.transpose();
  T.t = q_bar - T.R * p_bar;
  return T;
}

SurrogateOutput oracle_estimate(const PoseSet& gt, const PoseSet& current, double noise_scale,
                                RngStream& rng) {
  if (gt.size() != current.size())
    throw std::invalid_argument("oracle_estimate: pose set length mismatch");
  SurrogateOutput out;
  out.residuals = PoseSet(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    RigidTransform res = compose(gt[i], inverse(current[i]));
    if (noise_scale > 0) res = compose(sample_random_pose(rng, noise_scale, noise_scale), res);
    out.residuals[i] = res;
  }
  return out;
}

SurrogateOutput kabsch_surrogate_estimate(const std::vector<PointCloud>& scene_transformed,
                                          const Correspondences& corr, const PointCloud& world,
                                          DegeneratePolicy policy) {
  if (scene_transformed.size() != corr.per_scan.size())
    throw std::invalid_argument("kabsch_surrogate_estimate: correspondence count mismatch");

  std::unordered_map<std::int64_t, Vec3> world_by_id;
  world_by_id.reserve(world.size());
  for (std::size_t k = 0; k < world.size(); ++k) world_by_id[world.ids[k]] = world.points[k];

  SurrogateOutput out;
  out.residuals = PoseSet(scene_transformed.size());
  for (std::size_t i = 0; i < scene_transformed.size(); ++i) {
    std::vector<Vec3> p, q;
    std::vector<double> w;
    for (const auto& pair : corr.per_scan[i]) {
      const auto it = world_by_id.find(pair.world_id);
      if (it == world_by_id.end())
        throw std::invalid_argument("kabsch_surrogate_estimate: unknown world id");
      p.push_back(scene_transformed[i].points.at(pair.local_index));
      q.push_back(it->second);
      w.push_back(pair.weight);
    }
    try {
      out.residuals[i] = kabsch_align(p, q, w);
    } catch (const DegenerateInputError& e) {
      if (policy == DegeneratePolicy::Throw)
        throw DegenerateInputError("scan " + std::to_string(i) + ": " + e.what());
      out.residuals[i] = RigidTransform::identity();
      out.degenerate_scans.push_back(static_cast<int>(i));
    }
  }
  return out;
}

SurrogateOutput OracleSurrogate::estimate(const Scene& scene, const PoseSet& current,
                                          const std::vector<PointCloud>&, int,
                                          RngStream& rng) const {
  return oracle_estimate(scene.gt, current, noise_scale_, rng);
}

SurrogateOutput KabschSurrogate::estimate(const Scene& scene, const PoseSet&,
                                          const std::vector<PointCloud>& transformed, int,
                                          RngStream&) const {
  return kabsch_surrogate_estimate(transformed, id_correspondences(scene), scene.world, policy_);
}

}  // namespace mvreg
