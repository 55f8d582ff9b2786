#pragma once

#include <span>
#include <tuple>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/lie.hpp"

namespace mvreg {

struct LossConfig {
  double gamma_t = 0.1;     // translation loss weight
  double gamma_p = 0.1;     // point-wise loss weight
  double huber_beta = 0.06; // meters
};

struct MetricThresholds {
  std::vector<double> rotation_deg{3, 5, 10, 30, 45};
  std::vector<double> translation_m{0.05, 0.1, 0.25, 0.5, 0.75};
  double rr_rot_deg = 15.0;
  double rr_trans_m = 0.3;
};

// Order-independent pairwise (tree) summation.
double pairwise_sum(std::span<const double> x);

// All N(N-1) ordered relative poses T_{i<-j} = T_i^-1 T_j.
std::vector<std::tuple<int, int, RigidTransform>> pairwise_relative(const PoseSet& p);

// Geodesic rotation distance arccos((tr(Rgt^T Rpred) - 1) / 2), radians.
double rot_geodesic_loss(const Mat3& r_pred, const Mat3& r_gt);

// Huber on the Euclidean error norm e = |t_pred - t_gt|:
// e^2/2 for e <= beta, else beta (e - beta/2).
double trans_huber_loss(const Vec3& t_pred, const Vec3& t_gt, double beta);

// Mean over points of the L1 norm of (Rp p + tp) - (Rg p + tg).
double pointwise_loss(const RigidTransform& rel_pred, const RigidTransform& rel_gt,
                      std::span<const Vec3> pts);

struct LossBreakdown {
  double total = 0;
  double rot = 0;    // mean geodesic term
  double trans = 0;  // mean Huber term (unweighted)
  double point = 0;  // mean point-wise term (unweighted)
};

// (1/(N(N-1))) sum_{i != j} [L_r + gamma_t L_t + gamma_p L_p]; the point
// term is evaluated on scan j's local points.
LossBreakdown total_loss(const PoseSet& pred, const PoseSet& gt, const Scene& scene,
                         const LossConfig& cfg);

struct PairError {
  int i, j;
  double re_deg;
  double te_m;
};

struct EvalReport {
  std::vector<PairError> pairs;     // all ordered pairs
  std::vector<double> ecdf_rot;     // fraction under each rotation threshold
  std::vector<double> ecdf_trans;   // fraction under each translation threshold
  double re_mean = 0, re_median = 0;
  double te_mean = 0, te_median = 0;
  double rr = 0;  // fraction with RE <= rr_rot AND TE <= rr_trans
};

EvalReport evaluate(const PoseSet& pred, const PoseSet& gt, const MetricThresholds& th);

}  // namespace mvreg
