#pragma once

#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/lie.hpp"
#include "mvreg/rng.hpp"

namespace mvreg {

// Undirected pose graph; each edge stores the relative pose T_{i<-j} once
// with i < j.
struct PoseGraphEdge {
  int i, j;
  RigidTransform rel;  // T_{i<-j} = T_i^-1 T_j
  double weight;
};

struct PoseGraph {
  int n = 0;
  std::vector<PoseGraphEdge> edges;
};

enum class GraphMode { Full, OverlapPruned };

// Estimates T_{i<-j} by Procrustes on shared world ids for each selected
// pair, perturbs each edge by Exp of a noise twist, and with probability
// outlier_rate replaces it by a uniformly random pose (rotation uniform on
// SO(3), translation uniform in the room box). Edge weights default to the
// overlap ratio. Throws GraphError when the selection is disconnected.
PoseGraph build_pairwise_graph(const Scene& scene, GraphMode mode, double noise_scale,
                               double outlier_rate, RngStream& rng, bool uniform_weights = false);

// Spectral rotation synchronization (top-3 subspace of the weighted
// relative-rotation block matrix, found by orthogonal iteration capped at
// 1e4 sweeps) followed by linear least-squares translation recovery on
// R_i t_{i<-j} = t_j - t_i. Gauge-fixed: pose 0 is exactly identity.
// Throws NumericalError with the residual on non-convergence.
PoseSet synchronize(const PoseGraph& g);

// Breadth-first spanning tree from scan 0, composing edge transforms along
// tree paths. Gauge-fixed: pose 0 is exactly identity.
PoseSet chain_init(const PoseGraph& g);

}  // namespace mvreg
