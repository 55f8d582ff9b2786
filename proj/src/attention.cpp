#include "mvreg/attention.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "mvreg/errors.hpp"
#include "mvreg/rng.hpp"

namespace mvreg {

namespace {

Eigen::MatrixXd random_matrix(RngStream rng, int rows, int cols, double stdev) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = stdev * rng.normal();
  return m;
}

BlockWeights random_block(RngStream rng, int d) {
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  BlockWeights b;
  b.wq = random_matrix(rng.fork(0), d, d, s);
  b.wk = random_matrix(rng.fork(1), d, d, s);
  b.wv = random_matrix(rng.fork(2), d, d, s);
  b.wo = random_matrix(rng.fork(3), d, d, s);
  b.ff1 = random_matrix(rng.fork(4), d, 4 * d, s);
  b.ff2 = random_matrix(rng.fork(5), 4 * d, d, s);
  b.ln1_gain = Eigen::VectorXd::Ones(d);
  b.ln2_gain = Eigen::VectorXd::Ones(d);
  return b;
}

Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::VectorXd& gain) {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    out.row(r) = ((x.row(r).array() - mean) / std::sqrt(var + 1e-5)) * gain.transpose().array();
  }
  return out;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

void check_layer_shapes(const BlockWeights& w, int d, int layer, const char* where) {
  const bool ok = w.wq.rows() == d && w.wq.cols() == d && w.wk.rows() == d && w.wk.cols() == d &&
                  w.wv.rows() == d && w.wv.cols() == d && w.wo.rows() == d && w.wo.cols() == d &&
                  w.ff1.rows() == d && w.ff1.cols() == 4 * d && w.ff2.rows() == 4 * d &&
                  w.ff2.cols() == d && w.ln1_gain.size() == d && w.ln2_gain.size() == d;
  if (!ok)
    throw std::invalid_argument(std::string(where) + ": weight shape mismatch at layer " +
                                std::to_string(layer));
}

}  // namespace

Eigen::MatrixXd multi_head_attention(const Eigen::MatrixXd& x, const BlockWeights& w, int heads) {
  const int d = static_cast<int>(x.cols());
  const int hd = d / heads;
  const Eigen::MatrixXd q = x * w.wq;
  const Eigen::MatrixXd k = x * w.wk;
  const Eigen::MatrixXd v = x * w.wv;

  Eigen::MatrixXd concat(x.rows(), d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  for (int h = 0; h < heads; ++h) {
    const auto qh = q.middleCols(h * hd, hd);
    const auto kh = k.middleCols(h * hd, hd);
    const auto vh = v.middleCols(h * hd, hd);
    Eigen::MatrixXd logits = scale * (qh * kh.transpose());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      const double rowmax = logits.row(r).maxCoeff();
      Eigen::ArrayXd e = (logits.row(r).array() - rowmax).exp();
      logits.row(r) = (e / e.sum()).matrix();
    }
    concat.middleCols(h * hd, hd) = logits * vh;
  }
  return concat * w.wo;
}

Eigen::MatrixXd transformer_block(const Eigen::MatrixXd& x, const BlockWeights& w, int heads) {
  Eigen::MatrixXd y = x + multi_head_attention(layer_norm(x, w.ln1_gain), w, heads);
  Eigen::MatrixXd h = layer_norm(y, w.ln2_gain) * w.ff1;
  h = h.unaryExpr([](double v) { return gelu(v); });
  return y + h * w.ff2;
}

namespace {

void check_shapes(const TokenSet& tokens, const AAConfig& cfg, const char* where) {
  if (cfg.dim <= 0 || cfg.heads <= 0 || cfg.dim % cfg.heads != 0)
    throw std::invalid_argument(std::string(where) + ": dim must be a positive multiple of heads");
  for (int i = 0; i < tokens.n_scans(); ++i) {
    if (tokens.tokens[i].cols() != cfg.dim)
      throw std::invalid_argument(std::string(where) + ": scan " + std::to_string(i) +
                                  " has feature dim " + std::to_string(tokens.tokens[i].cols()) +
                                  ", expected " + std::to_string(cfg.dim));
  }
}

}  // namespace

AttentionWeights AttentionWeights::seeded(const AAConfig& cfg) {
  if (cfg.layers < 0 || cfg.layers % 2 != 0)
    throw std::invalid_argument("AttentionWeights: layer count must be even");
  if (cfg.dim <= 0 || cfg.heads <= 0 || cfg.dim % cfg.heads != 0)
    throw std::invalid_argument("AttentionWeights: dim must be a positive multiple of heads");

  RngStream root(cfg.seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(cfg.dim));
  AttentionWeights w;
  w.blocks.reserve(cfg.layers);
  for (int l = 0; l < cfg.layers; ++l) w.blocks.push_back(random_block(root.fork(l), cfg.dim));
  w.head_blocks.push_back(random_block(root.fork(1000), cfg.dim));
  w.head_blocks.push_back(random_block(root.fork(1001), cfg.dim));
  w.trans_hidden = random_matrix(root.fork(2000), cfg.dim, cfg.dim, s);
  w.trans_out = random_matrix(root.fork(2001), cfg.dim, 3, s);
  w.rot_hidden = random_matrix(root.fork(2002), cfg.dim, cfg.dim, s);
  w.rot_out = random_matrix(root.fork(2003), cfg.dim, 9, s);
  return w;
}

TokenSet alternating_attention(const TokenSet& tokens, const AttentionWeights& w,
                               const AAConfig& cfg) {
  check_shapes(tokens, cfg, "alternating_attention");
  if (static_cast<int>(w.blocks.size()) != cfg.layers)
    throw std::invalid_argument("alternating_attention: weight count does not match layer count");

  TokenSet cur = tokens;
  const int n = cur.n_scans();
  for (int l = 0; l < cfg.layers; ++l) {
    const BlockWeights& bw = w.blocks[l];
    check_layer_shapes(bw, cfg.dim, l, "alternating_attention");
    if (l % 2 == 0) {
      // Intra-scan: each scan's tokens attend only among themselves.
      for (int i = 0; i < n; ++i) cur.tokens[i] = transformer_block(cur.tokens[i], bw, cfg.heads);
    } else {
      // Cross-scan: one joint pool over the concatenation of all tokens.
      Eigen::Index total = 0;
      for (int i = 0; i < n; ++i) total += cur.tokens[i].rows();
      Eigen::MatrixXd flat(total, cfg.dim);
      Eigen::Index row = 0;
      for (int i = 0; i < n; ++i) {
        flat.middleRows(row, cur.tokens[i].rows()) = cur.tokens[i];
        row += cur.tokens[i].rows();
      }
      flat = transformer_block(flat, bw, cfg.heads);
      row = 0;
      for (int i = 0; i < n; ++i) {
        cur.tokens[i] = flat.middleRows(row, cur.tokens[i].rows());
        row += cur.tokens[i].rows();
      }
    }
  }
  return cur;
}

PoseSet regress_poses(const TokenSet& tokens, const AttentionWeights& w, const AAConfig& cfg) {
  check_shapes(tokens, cfg, "regress_poses");
  const int n = tokens.n_scans();
  PoseSet out(n);
  for (int i = 0; i < n; ++i) {
    if (tokens.tokens[i].rows() == 0)
      throw std::invalid_argument("regress_poses: scan " + std::to_string(i) + " has no tokens");
    Eigen::MatrixXd x = tokens.tokens[i];
    for (const BlockWeights& hb : w.head_blocks) x = transformer_block(x, hb, cfg.heads);
    const Eigen::RowVectorXd descriptor = x.colwise().mean();

    const Eigen::RowVectorXd th =
        (descriptor * w.trans_hidden).unaryExpr([](double v) { return gelu(v); });
    out[i].t = (th * w.trans_out).transpose();

    const Eigen::RowVectorXd rh =
        (descriptor * w.rot_hidden).unaryExpr([](double v) { return gelu(v); });
    const Eigen::RowVectorXd proxy = rh * w.rot_out;
    Mat3 m;
    m << proxy(0), proxy(1), proxy(2), proxy(3), proxy(4), proxy(5), proxy(6), proxy(7), proxy(8);
    try {
      out[i].R = project_to_so3(m);
    } catch (const DegenerateInputError& e) {
      throw DegenerateInputError("regress_poses: scan " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mvreg
