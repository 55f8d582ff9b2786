#include "mvreg/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvreg {

namespace {

double clamp1(double x) { return x < -1.0 ? -1.0 : (x > 1.0 ? 1.0 : x); }

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

double pairwise_sum(std::span<const double> x) {
  if (x.empty()) return 0;
  if (x.size() == 1) return x[0];
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.subspan(0, half)) + pairwise_sum(x.subspan(half));
}

std::vector<std::tuple<int, int, RigidTransform>> pairwise_relative(const PoseSet& p) {
  if (p.size() < 2) throw std::invalid_argument("pairwise_relative: need at least 2 poses");
  const int n = static_cast<int>(p.size());
  std::vector<std::tuple<int, int, RigidTransform>> rel;
  rel.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    const RigidTransform inv_i = inverse(p[i]);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      rel.emplace_back(i, j, compose(inv_i, p[j]));
    }
  }
  return rel;
}

double rot_geodesic_loss(const Mat3& r_pred, const Mat3& r_gt) {
  return std::acos(clamp1(((r_gt.transpose() * r_pred).trace() - 1.0) * 0.5));
}

double trans_huber_loss(const Vec3& t_pred, const Vec3& t_gt, double beta) {
  if (beta <= 0) throw std::invalid_argument("trans_huber_loss: beta must be positive");
  const double e = (t_pred - t_gt).norm();
  return e <= beta ? 0.5 * e * e : beta * (e - 0.5 * beta);
}

double pointwise_loss(const RigidTransform& rel_pred, const RigidTransform& rel_gt,
                      std::span<const Vec3> pts) {
  if (pts.empty()) throw std::invalid_argument("pointwise_loss: empty point set");
  std::vector<double> terms(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k)
    terms[k] = (rel_pred.apply(pts[k]) - rel_gt.apply(pts[k])).lpNorm<1>();
  return pairwise_sum(terms) / static_cast<double>(pts.size());
}

LossBreakdown total_loss(const PoseSet& pred, const PoseSet& gt, const Scene& scene,
                         const LossConfig& cfg) {
  if (pred.size() != gt.size())
    throw std::invalid_argument("total_loss: pose set length mismatch");
  if (pred.size() < 2) throw std::invalid_argument("total_loss: need at least 2 poses");
  if (gt.size() != scene.scans.size())
    throw std::invalid_argument("total_loss: pose count does not match scene");

  const auto rel_pred = pairwise_relative(pred);
  const auto rel_gt = pairwise_relative(gt);

  std::vector<double> rot_terms, trans_terms, point_terms;
  rot_terms.reserve(rel_pred.size());
  trans_terms.reserve(rel_pred.size());
  point_terms.reserve(rel_pred.size());
  for (std::size_t k = 0; k < rel_pred.size(); ++k) {
    const auto& [i, j, tp] = rel_pred[k];
    const auto& [gi, gj, tg] = rel_gt[k];
    rot_terms.push_back(rot_geodesic_loss(tp.R, tg.R));
    trans_terms.push_back(trans_huber_loss(tp.t, tg.t, cfg.huber_beta));
    point_terms.push_back(pointwise_loss(tp, tg, scene.scans[j].points));
  }

  const double m = static_cast<double>(rel_pred.size());
  LossBreakdown out;
  out.rot = pairwise_sum(rot_terms) / m;
  out.trans = pairwise_sum(trans_terms) / m;
  out.point = pairwise_sum(point_terms) / m;
  out.total = out.rot + cfg.gamma_t * out.trans + cfg.gamma_p * out.point;
  return out;
}

EvalReport evaluate(const PoseSet& pred, const PoseSet& gt, const MetricThresholds& th) {
  if (pred.size() != gt.size()) throw std::invalid_argument("evaluate: pose set length mismatch");
  const auto rel_pred = pairwise_relative(pred);
  const auto rel_gt = pairwise_relative(gt);

  EvalReport rep;
  rep.pairs.reserve(rel_pred.size());
  std::vector<double> re, te;
  re.reserve(rel_pred.size());
  te.reserve(rel_pred.size());
  int rr_hits = 0;
  for (std::size_t k = 0; k < rel_pred.size(); ++k) {
    const auto& [i, j, tp] = rel_pred[k];
    const auto& [gi, gj, tg] = rel_gt[k];
    const double re_deg = rot_geodesic_loss(tp.R, tg.R) * 180.0 / M_PI;
    const double te_m = (tp.t - tg.t).norm();
    rep.pairs.push_back({i, j, re_deg, te_m});
    re.push_back(re_deg);
    te.push_back(te_m);
    if (re_deg <= th.rr_rot_deg && te_m <= th.rr_trans_m) ++rr_hits;
  }

  const double m = static_cast<double>(rep.pairs.size());
  auto ecdf = [&](const std::vector<double>& errs, const std::vector<double>& thresholds) {
    std::vector<double> out(thresholds.size());
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      int hits = 0;
      for (double e : errs)
        if (e <= thresholds[k]) ++hits;
      out[k] = hits / m;
    }
    return out;
  };
  rep.ecdf_rot = ecdf(re, th.rotation_deg);
  rep.ecdf_trans = ecdf(te, th.translation_m);
  rep.re_mean = pairwise_sum(re) / m;
  rep.te_mean = pairwise_sum(te) / m;
  rep.re_median = median(re);
  rep.te_median = median(te);
  rep.rr = rr_hits / m;
  return rep;
}

}  // namespace mvreg
