#pragma once

#include <cstdint>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/lie.hpp"
#include "mvreg/rng.hpp"

namespace mvreg {

// Per-scan residual transforms T^{t->0} estimated by a surrogate model.
// Residuals live in the world frame and left-compose with the current pose.
struct SurrogateOutput {
  PoseSet residuals;
  std::vector<int> degenerate_scans;  // scans that fell back to an identity residual
};

// Per-scan (local point index -> world point id) pairs with weights; the
// synthetic harness retains point identities, so these are exact.
struct Correspondences {
  struct Pair {
    int local_index;
    std::int64_t world_id;
    double weight;
  };
  std::vector<std::vector<Pair>> per_scan;
};

Correspondences id_correspondences(const Scene& scene);

// Weighted Procrustes: argmin_T sum_k w_k |T p_k - q_k|^2 via SVD of the
// weighted cross-covariance. Throws DegenerateInputError when the weighted
// point sets are collinear (second singular value <= 1e-10) or fewer than
// 3 pairs are given.
RigidTransform kabsch_align(const std::vector<Vec3>& p, const std::vector<Vec3>& q,
                            const std::vector<double>& w);

// Exact residual gt_i (current_i)^-1, optionally perturbed by Exp of a
// noise twist with per-component scale noise_scale.
SurrogateOutput oracle_estimate(const PoseSet& gt, const PoseSet& current, double noise_scale,
                                RngStream& rng);

enum class DegeneratePolicy {
  IdentityResidual,  // record the scan and substitute an identity residual
  Throw,
};

// Genuine registration estimate: per scan, Procrustes from the currently
// transformed points to their world coordinates.
SurrogateOutput kabsch_surrogate_estimate(const std::vector<PointCloud>& scene_transformed,
                                          const Correspondences& corr, const PointCloud& world,
                                          DegeneratePolicy policy = DegeneratePolicy::IdentityResidual);

// The multiview surrogate registration model plugged into the denoising
// loop: maps the currently transformed scans to per-scan residual
// transforms toward the optimum. Implementations are stateless; `t` is
// optional timestep context that default implementations ignore.
class Surrogate {
 public:
  virtual ~Surrogate() = default;
  virtual SurrogateOutput estimate(const Scene& scene, const PoseSet& current,
                                   const std::vector<PointCloud>& transformed, int t,
                                   RngStream& rng) const = 0;
};

class OracleSurrogate final : public Surrogate {
 public:
  explicit OracleSurrogate(double noise_scale = 0.0) : noise_scale_(noise_scale) {}
  SurrogateOutput estimate(const Scene& scene, const PoseSet& current,
                           const std::vector<PointCloud>& transformed, int t,
                           RngStream& rng) const override;

 private:
  double noise_scale_;
};

class KabschSurrogate final : public Surrogate {
 public:
  explicit KabschSurrogate(DegeneratePolicy policy = DegeneratePolicy::IdentityResidual)
      : policy_(policy) {}
  SurrogateOutput estimate(const Scene& scene, const PoseSet& current,
                           const std::vector<PointCloud>& transformed, int t,
                           RngStream& rng) const override;

 private:
  DegeneratePolicy policy_;
};

}  // namespace mvreg
