#include "mvreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

#include <Eigen/Dense>

#include "mvreg/errors.hpp"

namespace mvreg {

namespace {

// Uniform rotation via normalized 4D Gaussian quaternion.
Mat3 random_rotation(RngStream& rng) {
  Eigen::Vector4d q;
  for (int k = 0; k < 4; ++k) q(k) = rng.normal();
  q.normalize();
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  Mat3 r;
  // clang-format off
  r << 1 - 2*(y*y + z*z),     2*(x*y - w*z),     2*(x*z + w*y),
           2*(x*y + w*z), 1 - 2*(x*x + z*z),     2*(y*z - w*x),
           2*(x*z - w*y),     2*(y*z + w*x), 1 - 2*(x*x + y*y);
  // clang-format on
  return r;
}

// Uniform point on the surface of the axis-aligned box [-e/2, e/2]^3.
Vec3 box_surface_point(RngStream& rng, double extent) {
  const double h = extent / 2.0;
  const int face = static_cast<int>(rng.uniform_int(0, 5));
  const double u = (rng.uniform() * 2.0 - 1.0) * h;
  const double v = (rng.uniform() * 2.0 - 1.0) * h;
  const int axis = face / 2;
  const double sign = (face % 2 == 0) ? -1.0 : 1.0;
  Vec3 p;
  p((axis + 1) % 3) = u;
  p((axis + 2) % 3) = v;
  p(axis) = sign * h;
  return p;
}

bool overlap_graph_connected(const Eigen::MatrixXd& overlap, double threshold) {
  const int n = static_cast<int>(overlap.rows());
  std::vector<bool> seen(n, false);
  std::vector<int> stack{0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < n; ++j) {
      if (!seen[j] && std::min(overlap(i, j), overlap(j, i)) >= threshold) {
        seen[j] = true;
        stack.push_back(j);
        ++count;
      }
    }
  }
  return count == n;
}

constexpr int kMinScanPoints = 5;

}  // namespace

std::vector<int> SuperpointSet::provenance(int level, int sp) const {
  std::vector<int> current{sp};
  for (int l = level; l >= 0; --l) {
    std::vector<int> next;
    for (int c : current) {
      const auto& m = levels.at(l).members.at(c);
      next.insert(next.end(), m.begin(), m.end());
    }
    current = std::move(next);
  }
  std::sort(current.begin(), current.end());
  return current;
}

Scene generate_scene(const SceneConfig& cfg, RngStream& rng) {
  if (cfg.n_scans < 2 || cfg.n_scans > 50)
    throw std::invalid_argument("generate_scene: n_scans must be in 2..50");
  if (cfg.world_points < 1 || cfg.room_extent <= 0 || cfg.view_radius <= 0 ||
      cfg.point_noise < 0 || cfg.overlap_threshold < 0)
    throw std::invalid_argument("generate_scene: invalid config");

  for (int attempt = 0; attempt < 100; ++attempt) {
    RngStream draw = rng.fork(attempt);

    Scene scene;
    scene.cfg = cfg;
    scene.world.points.reserve(cfg.world_points);
    scene.world.ids.reserve(cfg.world_points);
    for (int k = 0; k < cfg.world_points; ++k) {
      scene.world.points.push_back(box_surface_point(draw, cfg.room_extent));
      scene.world.ids.push_back(k);
    }

    scene.gt = PoseSet(cfg.n_scans);
    const double h = cfg.room_extent / 2.0;
    for (int i = 0; i < cfg.n_scans; ++i) {
      RigidTransform T;
      T.R = random_rotation(draw);
      for (int a = 0; a < 3; ++a) T.t(a) = (draw.uniform() * 2.0 - 1.0) * h;
      scene.gt[i] = T;
    }

    bool enough_points = true;
    scene.scans.resize(cfg.n_scans);
    for (int i = 0; i < cfg.n_scans; ++i) {
      const RigidTransform inv = inverse(scene.gt[i]);
      PointCloud& scan = scene.scans[i];
      for (int k = 0; k < cfg.world_points; ++k) {
        const Vec3& p = scene.world.points[k];
        if ((p - scene.gt[i].t).norm() <= cfg.view_radius) {
          Vec3 local = inv.apply(p);
          if (cfg.point_noise > 0) local += cfg.point_noise * draw.normal3();
          scan.points.push_back(local);
          scan.ids.push_back(k);
        }
      }
      if (static_cast<int>(scan.size()) < kMinScanPoints) {
        enough_points = false;
        break;
      }
    }
    if (!enough_points) continue;

    const int n = cfg.n_scans;
    scene.overlap.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) scene.overlap(i, j) = overlap_ratio(scene, i, j);

    if (overlap_graph_connected(scene.overlap, cfg.overlap_threshold)) return scene;
  }
  throw GenerationError(
      "generate_scene: overlap graph not connected after 100 retries; "
      "increase view_radius or lower overlap_threshold");
}

std::vector<PointCloud> transform_scene(const Scene& scene, const PoseSet& poses) {
  if (poses.size() != scene.scans.size())
    throw std::invalid_argument("transform_scene: pose count does not match scan count");
  std::vector<PointCloud> out(scene.scans.size());
  for (std::size_t i = 0; i < scene.scans.size(); ++i) {
    const PointCloud& scan = scene.scans[i];
    out[i].ids = scan.ids;
    out[i].points.resize(scan.size());
    for (std::size_t k = 0; k < scan.size(); ++k) out[i].points[k] = poses[i].apply(scan.points[k]);
  }
  return out;
}

SuperpointSet voxel_downsample_hierarchy(const PointCloud& cloud, double base_voxel, int levels) {
  if (base_voxel <= 0) throw std::invalid_argument("voxel_downsample_hierarchy: non-positive voxel");
  if (levels < 1) throw std::invalid_argument("voxel_downsample_hierarchy: levels must be >= 1");
  if (cloud.size() == 0) throw std::invalid_argument("voxel_downsample_hierarchy: empty cloud");

  SuperpointSet sp;
  sp.levels.reserve(levels + 1);

  std::vector<Vec3> prev = cloud.points;
  for (int level = 0; level <= levels; ++level) {
    const double cell = base_voxel * std::pow(2.0, level);
    // Ordered map keyed by integer cell coordinates: deterministic centroid order.
    std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t>, std::vector<int>> bins;
    for (int k = 0; k < static_cast<int>(prev.size()); ++k) {
      const Vec3& p = prev[k];
      bins[{static_cast<std::int64_t>(std::floor(p.x() / cell)),
            static_cast<std::int64_t>(std::floor(p.y() / cell)),
            static_cast<std::int64_t>(std::floor(p.z() / cell))}]
          .push_back(k);
    }
    SuperpointLevel lvl;
    lvl.centroids.reserve(bins.size());
    lvl.members.reserve(bins.size());
    for (auto& [key, members] : bins) {
      Vec3 c = Vec3::Zero();
      for (int m : members) c += prev[m];
      c /= static_cast<double>(members.size());
      lvl.centroids.push_back(c);
      lvl.members.push_back(std::move(members));
    }
    prev = lvl.centroids;
    sp.levels.push_back(std::move(lvl));
  }
  return sp;
}

std::vector<Vec3> superpoint_covariance_eigenvalues(const PointCloud& cloud,
                                                    const SuperpointSet& sp, int level) {
  const auto& lvl = sp.levels.at(level);
  std::vector<Vec3> out(lvl.centroids.size());
  for (int s = 0; s < static_cast<int>(lvl.centroids.size()); ++s) {
    const std::vector<int> idx = sp.provenance(level, s);
    Vec3 mean = Vec3::Zero();
    for (int k : idx) mean += cloud.points[k];
    mean /= static_cast<double>(idx.size());
    Mat3 cov = Mat3::Zero();
    for (int k : idx) {
      const Vec3 d = cloud.points[k] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(idx.size());
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    out[s] = eig.eigenvalues();
  }
  return out;
}

Eigen::MatrixXd sinusoidal_encode(const std::vector<Vec3>& coords, int d) {
  if (d < 6 || d % 6 != 0)
    throw std::invalid_argument("sinusoidal_encode: feature dim must be a positive multiple of 6");
  const int nfreq = d / 6;
  const double omega_min = 2.0 * M_PI / 20.0;
  const double omega_max = 2.0 * M_PI / 0.05;
  std::vector<double> omega(nfreq);
  for (int k = 0; k < nfreq; ++k) {
    omega[k] = nfreq == 1
                   ? omega_min
                   : omega_min * std::pow(omega_max / omega_min,
                                          static_cast<double>(k) / static_cast<double>(nfreq - 1));
  }

  Eigen::MatrixXd feat(static_cast<Eigen::Index>(coords.size()), d);
  for (Eigen::Index r = 0; r < feat.rows(); ++r) {
    int col = 0;
    for (int axis = 0; axis < 3; ++axis) {
      const double x = coords[r](axis);
      for (int k = 0; k < nfreq; ++k) feat(r, col++) = std::sin(omega[k] * x);
      for (int k = 0; k < nfreq; ++k) feat(r, col++) = std::cos(omega[k] * x);
    }
  }
  return feat;
}

double overlap_ratio(const Scene& scene, int i, int j) {
  if (i < 0 || j < 0 || i >= scene.n_scans() || j >= scene.n_scans())
    throw std::out_of_range("overlap_ratio: scan index out of range");
  if (i == j) return 1.0;
  const auto& a = scene.scans[i].ids;
  if (a.empty()) return 0.0;
  std::unordered_set<std::int64_t> in_j(scene.scans[j].ids.begin(), scene.scans[j].ids.end());
  std::size_t shared = 0;
  for (std::int64_t id : a)
    if (in_j.count(id)) ++shared;
  return static_cast<double>(shared) / static_cast<double>(a.size());
}

}  // namespace mvreg
