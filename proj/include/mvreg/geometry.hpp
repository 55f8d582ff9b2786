#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mvreg/lie.hpp"
#include "mvreg/rng.hpp"

namespace mvreg {

// Points with persistent world identities; ids are unique within a cloud.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::int64_t> ids;

  std::size_t size() const { return points.size(); }
};

struct SceneConfig {
  int n_scans = 8;
  int world_points = 1500;
  double room_extent = 8.0;       // cube side, meters
  double view_radius = 6.0;       // visibility radius around each camera
  double point_noise = 0.0;       // per-coordinate Gaussian sigma, meters
  double overlap_threshold = 0.1; // overlap-graph edge threshold
  std::uint64_t seed = 0;
};

// Synthetic multiview world: N local-frame scans, their ground-truth global
// poses, the world point table, and the pairwise overlap-ratio matrix.
struct Scene {
  SceneConfig cfg;
  std::vector<PointCloud> scans;
  PoseSet gt;
  PointCloud world;
  Eigen::MatrixXd overlap;

  int n_scans() const { return static_cast<int>(scans.size()); }
};

// One resolution level of the superpoint hierarchy; `members` maps each
// centroid to its member indices at the previous level (level 0: into the
// input cloud).
struct SuperpointLevel {
  std::vector<Vec3> centroids;
  std::vector<std::vector<int>> members;
};

struct SuperpointSet {
  std::vector<SuperpointLevel> levels;  // level k pools cells of side base * 2^k

  // Flattens provenance of superpoint `sp` at `level` down to input indices.
  std::vector<int> provenance(int level, int sp) const;
};

// Samples world points on the surfaces of the room box, places N cameras
// with uniform random rotations inside it, cuts each scan by view radius,
// and retries (up to 100 draws) until the overlap graph is connected and
// every scan has enough points for alignment. Throws GenerationError when
// connectivity is unattainable.
Scene generate_scene(const SceneConfig& cfg, RngStream& rng);

// Applies pose i to every point of scan i; ids preserved.
std::vector<PointCloud> transform_scene(const Scene& scene, const PoseSet& poses);

// Level 0 bins points into base_voxel cells (floor of coordinate / voxel,
// one centroid per occupied cell); each further level re-bins the previous
// level's centroids into cells twice as wide. `levels` counts the pooled
// levels beyond level 0, so the result holds levels + 1 arrays.
SuperpointSet voxel_downsample_hierarchy(const PointCloud& cloud, double base_voxel, int levels = 5);

// Per-superpoint covariance eigenvalues (ascending) of the member points; a
// non-learned stand-in feature for pooled cells.
std::vector<Vec3> superpoint_covariance_eigenvalues(const PointCloud& cloud,
                                                    const SuperpointSet& sp, int level);

// Absolute sinusoidal encoding: per axis d/6 sine and d/6 cosine channels at
// geometric frequencies spanning [2*pi/20, 2*pi/0.05] 1/m. d must divide by 6.
Eigen::MatrixXd sinusoidal_encode(const std::vector<Vec3>& coords, int d);

// Fraction of scan i's world ids also present in scan j.
double overlap_ratio(const Scene& scene, int i, int j);

}  // namespace mvreg
