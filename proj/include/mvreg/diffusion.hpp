#pragma once

#include <cstdint>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/lie.hpp"
#include "mvreg/rng.hpp"
#include "mvreg/schedule.hpp"
#include "mvreg/surrogate.hpp"

namespace mvreg {

struct DiffusionConfig {
  double gamma = 0.1;       // perturbation weight on the noise twist
  int train_steps = 200;    // T
  int inference_steps = 10; // K, evenly strided timesteps ending at t = 1
  std::uint64_t seed = 0;
  bool noise_on = true;          // stochastic term in reverse steps
  bool sample_start = false;     // sample the t = T state instead of starting at the prior
  double eps_rot_scale = 1.0;    // anisotropy knobs on the noise twist; default isotropic
  double eps_trans_scale = 1.0;
};

// One forward-diffusion draw at signal level abar_t:
//   Exp(gamma sqrt(1 - abar_t) eps) Interp(sqrt(abar_t); T0, prior)
// with an independent standard-normal twist eps per scan.
PoseSet forward_diffuse_at(const PoseSet& t0, const PoseSet& prior, double alpha_bar_t,
                           double gamma, RngStream& rng, double eps_rot_scale = 1.0,
                           double eps_trans_scale = 1.0);

// Schedule-indexed wrapper; t in 0..T (t = 0 returns t0 exactly).
PoseSet forward_diffuse(const PoseSet& t0, const PoseSet& prior, const NoiseSchedule& s, int t,
                        double gamma, RngStream& rng, double eps_rot_scale = 1.0,
                        double eps_trans_scale = 1.0);

// Expected posterior pose Exp(l0 Log T0 + l1 Log Tt + l2 Log Tprior).
RigidTransform posterior_mean(const RigidTransform& t0, const RigidTransform& tt,
                              const RigidTransform& prior, const DenoiseCoeffs& c);

// One reverse step from surrogate residuals:
//   Exp(l0 Log(residual_i Tt_i) + l1 Log(Tt_i) + l2 Log(prior_i) [+ sigma eps_i]).
// With an identity prior the l2 term vanishes and this is the pairwise
// SE(3) denoising step.
PoseSet reverse_step(const PoseSet& residuals, const PoseSet& tt, const PoseSet& prior,
                     const DenoiseCoeffs& c, bool noise_on, RngStream& rng,
                     double eps_rot_scale = 1.0, double eps_trans_scale = 1.0);

// K evenly strided timesteps from T down to 1 (always ending at 1).
std::vector<int> inference_timesteps(int train_steps, int inference_steps);

// Full denoising loop: starts the chain at t = T (deterministically at the
// prior by default), and at each strided timestep transforms the scene by
// the current pose set, queries the surrogate, and applies reverse_step.
// Returns the K+1 states of the trajectory; the last entry is the result.
std::vector<PoseSet> run_denoising(const Scene& scene, const PoseSet& prior,
                                   const Surrogate& surrogate, const NoiseSchedule& s,
                                   const DiffusionConfig& cfg, RngStream& rng);

// Variational-lower-bound diagnostics. Gaussians live on the tangent space
// with shared covariance beta_tilde_t I, so each denoising KL reduces to
// |delta mu|^2 / (2 beta_tilde_t) summed over scans. The residual term is a
// Gaussian log-density at t = 1 with variance beta_1 (beta_tilde_1 is zero);
// the prior matching term compares the t = T forward marginal against the
// prior-centered terminal distribution and never touches the surrogate.
struct VlbTerms {
  double residual_term = 0;                 // log-likelihood, higher is better
  double prior_matching_term = 0;           // KL >= 0
  std::vector<double> denoising_terms;      // index t-2 holds the KL at timestep t
};

VlbTerms vlb_terms(const Scene& scene, const PoseSet& t0, const PoseSet& prior,
                   const Surrogate& surrogate, const NoiseSchedule& s,
                   const DiffusionConfig& cfg, RngStream& rng);

}  // namespace mvreg
