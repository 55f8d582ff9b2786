#pragma once

#include <string>
#include <vector>

namespace mvreg {

// Per-timestep variance controls of the diffusion chain. Steps are indexed
// t in 1..T; alpha_bar has T+1 entries with alpha_bar(0) = 1.
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> beta;        // beta[t-1] = beta_t
  std::vector<double> alpha;       // alpha[t-1] = 1 - beta_t
  std::vector<double> alpha_bar;   // alpha_bar[t], t in 0..T
  std::vector<double> beta_tilde;  // beta_tilde[t-1] = beta_t (1 - abar_{t-1}) / (1 - abar_t)

  double beta_at(int t) const { return beta.at(t - 1); }
  double alpha_at(int t) const { return alpha.at(t - 1); }
  double alpha_bar_at(int t) const { return alpha_bar.at(t); }
  double beta_tilde_at(int t) const { return beta_tilde.at(t - 1); }
};

// Posterior mixing weights for one reverse step; lambda0 + lambda1 + lambda2 = 1.
struct DenoiseCoeffs {
  double lambda0 = 0;  // weight on the (estimated) optimal pose
  double lambda1 = 0;  // weight on the current noisy pose
  double lambda2 = 0;  // weight on the prior pose
  double sigma = 0;    // sqrt(beta_tilde_t)
};

// Cosine schedule: abar_t = f(t)/f(0), f(t) = cos^2(((t/T + s)/(1 + s)) pi/2),
// s = 0.008; beta_t = 1 - abar_t/abar_{t-1} clipped to <= 0.999, with abar
// recomputed from the clipped betas so the product invariant holds exactly.
NoiseSchedule cosine_schedule(int steps);

// Throws std::out_of_range unless 1 <= t <= T.
DenoiseCoeffs coeffs_at(const NoiseSchedule& s, int t);

// Audit dump: CSV with columns t, beta, alpha_bar, beta_tilde, lambda0,
// lambda1, lambda2.
void write_schedule_csv(const NoiseSchedule& s, const std::string& path);

}  // namespace mvreg
