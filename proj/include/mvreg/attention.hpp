#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "mvreg/lie.hpp"

namespace mvreg {

// Per-scan superpoint feature arrays; row k of tokens[i] is token k of scan i.
struct TokenSet {
  std::vector<Eigen::MatrixXd> tokens;

  int n_scans() const { return static_cast<int>(tokens.size()); }
};

struct AAConfig {
  int layers = 4;  // total block count, alternating [intra, cross]; must be even
  int heads = 4;
  int dim = 96;    // must divide by heads
  std::uint64_t seed = 0;
};

// One transformer block: pre-norm multi-head attention and feed-forward,
// both with residual adds.
struct BlockWeights {
  Eigen::MatrixXd wq, wk, wv, wo;      // d x d
  Eigen::MatrixXd ff1, ff2;            // d x 4d, 4d x d
  Eigen::VectorXd ln1_gain, ln2_gain;  // d
};

struct AttentionWeights {
  std::vector<BlockWeights> blocks;       // layers entries
  std::vector<BlockWeights> head_blocks;  // two per-scan refinement blocks
  Eigen::MatrixXd trans_hidden, trans_out;  // d x d, d x 3
  Eigen::MatrixXd rot_hidden, rot_out;      // d x d, d x 9

  // Deterministic scaled-normal initialization (stdev 1/sqrt(d)) from the
  // config seed; normalization gains start at 1.
  static AttentionWeights seeded(const AAConfig& cfg);
};

// Softmax scaled-dot-product multi-head self-attention over one token pool.
Eigen::MatrixXd multi_head_attention(const Eigen::MatrixXd& x, const BlockWeights& w, int heads);

// Pre-norm block: x + MHA(LN(x)) followed by the feed-forward residual.
Eigen::MatrixXd transformer_block(const Eigen::MatrixXd& x, const BlockWeights& w, int heads);

// L blocks alternating intra-scan self-attention (independent per scan) and
// cross-scan attention over the concatenation of all tokens. No reference
// tokens and no scan-order channels, so reordering scans permutes outputs
// without changing their values. Positional encodings are the caller's
// responsibility (added to tokens once, before the stack).
TokenSet alternating_attention(const TokenSet& tokens, const AttentionWeights& w,
                               const AAConfig& cfg);

// Per scan: two refinement self-attention blocks, mean-pool to a scan
// descriptor, then a translation head and a 9D rotation proxy projected
// onto SO(3).
PoseSet regress_poses(const TokenSet& tokens, const AttentionWeights& w, const AAConfig& cfg);

}  // namespace mvreg
