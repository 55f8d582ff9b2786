#include "mvreg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>

#include "mvreg/errors.hpp"
#include "mvreg/surrogate.hpp"

namespace mvreg {

namespace {

bool graph_connected(int n, const std::vector<PoseGraphEdge>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<bool> seen(n, false);
  std::deque<int> queue{0};
  seen[0] = true;
  int count = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
        ++count;
      }
    }
  }
  return count == n;
}

Mat3 uniform_rotation(RngStream& rng) {
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

}  // namespace

PoseGraph build_pairwise_graph(const Scene& scene, GraphMode mode, double noise_scale,
                               double outlier_rate, RngStream& rng, bool uniform_weights) {
  const int n = scene.n_scans();
  PoseGraph g;
  g.n = n;

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double ratio = std::min(scene.overlap(i, j), scene.overlap(j, i));
      if (mode == GraphMode::OverlapPruned && ratio < scene.cfg.overlap_threshold) continue;

      // Shared world ids give exact correspondences between the two scans.
      std::unordered_map<std::int64_t, int> index_i;
      index_i.reserve(scene.scans[i].size());
      for (int k = 0; k < static_cast<int>(scene.scans[i].size()); ++k)
        index_i[scene.scans[i].ids[k]] = k;
      std::vector<Vec3> p, q;
      for (int k = 0; k < static_cast<int>(scene.scans[j].size()); ++k) {
        const auto it = index_i.find(scene.scans[j].ids[k]);
        if (it == index_i.end()) continue;
        p.push_back(scene.scans[j].points[k]);
        q.push_back(scene.scans[i].points[it->second]);
      }
      if (p.size() < 3) continue;

      RigidTransform rel;
      try {
        rel = kabsch_align(p, q, std::vector<double>(p.size(), 1.0));
      } catch (const DegenerateInputError&) {
        continue;
      }

      if (outlier_rate > 0 && rng.uniform() < outlier_rate) {
        rel.R = uniform_rotation(rng);
        const double h = scene.cfg.room_extent / 2.0;
        for (int a = 0; a < 3; ++a) rel.t(a) = (rng.uniform() * 2.0 - 1.0) * h;
      } else if (noise_scale > 0) {
        rel = compose(sample_random_pose(rng, noise_scale, noise_scale), rel);
      }

      g.edges.push_back({i, j, rel, uniform_weights ? 1.0 : ratio});
    }
  }

  if (!graph_connected(n, g.edges))
    throw GraphError("build_pairwise_graph: selected pose graph is disconnected");
  return g;
}

PoseSet synchronize(const PoseGraph& g) {
  if (g.n < 2) throw GraphError("synchronize: need at least 2 nodes");
  if (!graph_connected(g.n, g.edges)) throw GraphError("synchronize: graph is disconnected");

  // Canonical edge order makes assembly independent of caller's edge order.
  std::vector<PoseGraphEdge> edges = g.edges;
  std::sort(edges.begin(), edges.end(), [](const PoseGraphEdge& a, const PoseGraphEdge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });

  const int n = g.n;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (const auto& e : edges) {
    const double w = e.weight > 0 ? e.weight : 1e-12;
    m.block<3, 3>(3 * e.i, 3 * e.j) += w * e.rel.R;
    m.block<3, 3>(3 * e.j, 3 * e.i) += w * e.rel.R.transpose();
    degree(e.i) += w;
    degree(e.j) += w;
  }
  // Degree-normalized symmetric form: exact edges give eigenvalue 1 on the
  // stacked-rotation subspace.
  for (int i = 0; i < n; ++i) {
    const double di = 1.0 / std::sqrt(std::max(degree(i), 1e-12));
    m.middleRows<3>(3 * i) *= di;
    m.middleCols<3>(3 * i) *= di;
  }
  // The normalized spectrum lies in [-1, 1]; shifting by +I sends the target
  // eigenvalues to the strict magnitude top (a two-scan graph otherwise has
  // +-1 pairs and the iteration cannot settle).
  m += Eigen::MatrixXd::Identity(3 * n, 3 * n);

  // Orthogonal iteration for the top-3 invariant subspace.
  Eigen::MatrixXd y(3 * n, 3);
  for (int i = 0; i < n; ++i) y.middleRows<3>(3 * i) = Mat3::Identity();
  y.colwise().normalize();

  double residual = 0;
  bool converged = false;
  for (int iter = 0; iter < 10000; ++iter) {
    Eigen::MatrixXd z = m * y;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(3 * n, 3);
    // Fix column signs for determinism.
    for (int c = 0; c < 3; ++c) {
      Eigen::Index piv;
      q.col(c).cwiseAbs().maxCoeff(&piv);
      if (q(piv, c) < 0) q.col(c) = -q.col(c);
    }
    residual = (m * q - q * (q.transpose() * m * q)).norm();
    y = q;
    if (residual < 1e-12) {
      converged = true;
      break;
    }
  }
  // Small eigengaps (heavy outliers) converge slowly; a 1e-7 subspace
  // residual is still far below the statistical error in that regime.
  if (!converged && residual >= 1e-7)
    throw NumericalError("synchronize: eigen iteration did not converge after 10000 sweeps "
                         "(residual " + std::to_string(residual) + ")");

  // Blocks approximate R_i^T Q for a common orthogonal Q; flip the basis if
  // Q landed in the det = -1 component.
  if (y.block<3, 3>(0, 0).determinant() < 0) y.col(2) = -y.col(2);

  std::vector<Mat3> blocks(n);
  for (int i = 0; i < n; ++i) blocks[i] = project_to_so3(y.block<3, 3>(3 * i, 0));

  PoseSet out(n);
  out[0] = RigidTransform::identity();
  for (int i = 1; i < n; ++i) out[i].R = blocks[0] * blocks[i].transpose();

  // Translation recovery: R_i t_{i<-j} = t_j - t_i, anchored at t_0 = 0.
  const int unknowns = 3 * (n - 1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3 * static_cast<int>(edges.size()), unknowns);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * static_cast<int>(edges.size()));
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const double sw = std::sqrt(e.weight > 0 ? e.weight : 1e-12);
    const Vec3 rhs = sw * (out[e.i].R * e.rel.t);
    // rhs = t_j - t_i
    if (e.j > 0) a.block<3, 3>(3 * k, 3 * (e.j - 1)) = sw * Mat3::Identity();
    if (e.i > 0) a.block<3, 3>(3 * k, 3 * (e.i - 1)) = -sw * Mat3::Identity();
    b.segment<3>(3 * k) = rhs;
  }
  const Eigen::VectorXd t = a.colPivHouseholderQr().solve(b);
  for (int i = 1; i < n; ++i) out[i].t = t.segment<3>(3 * (i - 1));
  return out;
}

PoseSet chain_init(const PoseGraph& g) {
  if (g.n < 1) throw GraphError("chain_init: empty graph");
  std::vector<std::vector<std::pair<int, const PoseGraphEdge*>>> adj(g.n);
  for (const auto& e : g.edges) {
    adj[e.i].push_back({e.j, &e});
    adj[e.j].push_back({e.i, &e});
  }

  PoseSet out(g.n);
  std::vector<bool> seen(g.n, false);
  std::deque<int> queue{0};
  seen[0] = true;
  out[0] = RigidTransform::identity();
  int count = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const auto& [v, e] : adj[u]) {
      if (seen[v]) continue;
      seen[v] = true;
      // T_j = T_i T_{i<-j}; walk the stored direction accordingly.
      out[v] = e->i == u ? compose(out[u], e->rel) : compose(out[u], inverse(e->rel));
      queue.push_back(v);
      ++count;
    }
  }
  if (count != g.n) throw GraphError("chain_init: graph is disconnected");
  return out;
}

}  // namespace mvreg
