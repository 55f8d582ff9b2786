#include "mvreg/diffusion.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mvreg {

namespace {

Twist noise_twist(RngStream& rng, double scale, double rot_knob, double trans_knob) {
  Twist eps;
  eps.omega = scale * rot_knob * rng.normal3();
  eps.v = scale * trans_knob * rng.normal3();
  return eps;
}

}  // namespace

PoseSet forward_diffuse_at(const PoseSet& t0, const PoseSet& prior, double alpha_bar_t,
                           double gamma, RngStream& rng, double eps_rot_scale,
                           double eps_trans_scale) {
  if (t0.size() != prior.size())
    throw std::invalid_argument("forward_diffuse: pose set length mismatch");
  if (alpha_bar_t < 0 || alpha_bar_t > 1)
    throw std::invalid_argument("forward_diffuse: alpha_bar outside [0, 1]");
  if (gamma < 0) throw std::invalid_argument("forward_diffuse: negative gamma");
  const double w = std::sqrt(alpha_bar_t);
  const double noise_scale = gamma * std::sqrt(1.0 - alpha_bar_t);

  PoseSet out(t0.size());
  for (std::size_t i = 0; i < t0.size(); ++i) {
    const RigidTransform interp = pose_interpolate(w, t0[i], prior[i]);
    if (noise_scale > 0) {
      out[i] = compose(se3_exp(noise_twist(rng, noise_scale, eps_rot_scale, eps_trans_scale)),
                       interp);
    } else {
      out[i] = interp;
    }
  }
  return out;
}

PoseSet forward_diffuse(const PoseSet& t0, const PoseSet& prior, const NoiseSchedule& s, int t,
                        double gamma, RngStream& rng, double eps_rot_scale,
                        double eps_trans_scale) {
  if (t < 0 || t > s.steps) throw std::out_of_range("forward_diffuse: t out of range 0..T");
  return forward_diffuse_at(t0, prior, s.alpha_bar_at(t), gamma, rng, eps_rot_scale,
                            eps_trans_scale);
}

RigidTransform posterior_mean(const RigidTransform& t0, const RigidTransform& tt,
                              const RigidTransform& prior, const DenoiseCoeffs& c) {
  const Vec6 mean = c.lambda0 * se3_log(t0).vec() + c.lambda1 * se3_log(tt).vec() +
                    c.lambda2 * se3_log(prior).vec();
  return se3_exp(Twist::from_vec(mean));
}

PoseSet reverse_step(const PoseSet& residuals, const PoseSet& tt, const PoseSet& prior,
                     const DenoiseCoeffs& c, bool noise_on, RngStream& rng, double eps_rot_scale,
                     double eps_trans_scale) {
  if (residuals.size() != tt.size() || tt.size() != prior.size())
    throw std::invalid_argument("reverse_step: pose set length mismatch");

  PoseSet out(tt.size());
  for (std::size_t i = 0; i < tt.size(); ++i) {
    Vec6 mean;
    try {
      mean = c.lambda0 * se3_log(compose(residuals[i], tt[i]), static_cast<int>(i)).vec() +
             c.lambda1 * se3_log(tt[i], static_cast<int>(i)).vec() +
             c.lambda2 * se3_log(prior[i], static_cast<int>(i)).vec();
    } catch (const std::domain_error& e) {
      throw std::domain_error("reverse_step: " + std::string(e.what()));
    }
    if (noise_on && c.sigma > 0) {
      mean += noise_twist(rng, c.sigma, eps_rot_scale, eps_trans_scale).vec();
    }
    out[i] = se3_exp(Twist::from_vec(mean));
  }
  return out;
}

std::vector<int> inference_timesteps(int train_steps, int inference_steps) {
  if (inference_steps < 1 || inference_steps > train_steps)
    throw std::invalid_argument("inference_timesteps: need 1 <= K <= T");
  std::vector<int> ts(inference_steps);
  if (inference_steps == 1) {
    ts[0] = 1;
    return ts;
  }
  const double stride = static_cast<double>(train_steps - 1) / (inference_steps - 1);
  for (int k = 0; k < inference_steps; ++k)
    ts[k] = train_steps - static_cast<int>(std::llround(k * stride));
  return ts;
}

std::vector<PoseSet> run_denoising(const Scene& scene, const PoseSet& prior,
                                   const Surrogate& surrogate, const NoiseSchedule& s,
                                   const DiffusionConfig& cfg, RngStream& rng) {
  if (prior.size() != scene.scans.size())
    throw std::invalid_argument("run_denoising: prior length does not match scene");

  PoseSet state = prior;
  if (cfg.sample_start) {
    // Terminal draw of the forward chain; with abar_T ~ 0 the interpolant is
    // the prior itself, so this is prior-centered noise.
    state = forward_diffuse_at(prior, prior, s.alpha_bar_at(s.steps), cfg.gamma, rng,
                               cfg.eps_rot_scale, cfg.eps_trans_scale);
  }

  std::vector<PoseSet> trajectory;
  trajectory.reserve(cfg.inference_steps + 1);
  trajectory.push_back(state);

  const std::vector<int> timesteps = inference_timesteps(s.steps, cfg.inference_steps);
  for (std::size_t k = 0; k < timesteps.size(); ++k) {
    const int t = timesteps[k];
    const std::vector<PointCloud> transformed = transform_scene(scene, state);
    SurrogateOutput est;
    try {
      est = surrogate.estimate(scene, state, transformed, t, rng);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_denoising: surrogate failed at step " + std::to_string(k) +
                               " (t = " + std::to_string(t) + "): " + e.what());
    }
    if (est.residuals.size() != state.size())
      throw std::invalid_argument("run_denoising: surrogate returned wrong residual count");
    state = reverse_step(est.residuals, state, prior, coeffs_at(s, t), cfg.noise_on, rng,
                         cfg.eps_rot_scale, cfg.eps_trans_scale);
    trajectory.push_back(state);
  }
  return trajectory;
}

VlbTerms vlb_terms(const Scene& scene, const PoseSet& t0, const PoseSet& prior,
                   const Surrogate& surrogate, const NoiseSchedule& s, const DiffusionConfig& cfg,
                   RngStream& rng) {
  if (t0.size() != prior.size() || t0.size() != scene.scans.size())
    throw std::invalid_argument("vlb_terms: pose set length mismatch");
  const std::size_t n = t0.size();

  VlbTerms out;
  out.denoising_terms.resize(std::max(0, s.steps - 1), 0.0);

  // Prior matching term: KL between the t = T forward marginal (mean at the
  // interpolant) and the prior-centered terminal, shared covariance
  // gamma^2 (1 - abar_T) I. Constant in the surrogate.
  {
    const double abar_T = s.alpha_bar_at(s.steps);
    const double var = cfg.gamma * cfg.gamma * (1.0 - abar_T);
    double sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const RigidTransform interp = pose_interpolate(std::sqrt(abar_T), t0[i], prior[i]);
      const Vec6 d = se3_log(compose(interp, inverse(prior[i]))).vec();
      sq += d.squaredNorm();
    }
    if (var > 0) {
      out.prior_matching_term = sq / (2.0 * var);
    } else {
      out.prior_matching_term = sq == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
  }

  for (int t = 1; t <= s.steps; ++t) {
    const PoseSet tt = forward_diffuse(t0, prior, s, t, cfg.gamma, rng, cfg.eps_rot_scale,
                                       cfg.eps_trans_scale);
    const std::vector<PointCloud> transformed = transform_scene(scene, tt);
    const SurrogateOutput est = surrogate.estimate(scene, tt, transformed, t, rng);
    const DenoiseCoeffs c = coeffs_at(s, t);

    // Mean difference between posterior (Eq. with true T^0) and model (with
    // the surrogate residual); the lambda1/lambda2 terms cancel.
    double sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec6 d = c.lambda0 * (se3_log(t0[i]).vec() -
                                  se3_log(compose(est.residuals[i], tt[i])).vec());
      sq += d.squaredNorm();
    }

    if (t == 1) {
      // beta_tilde_1 = 0; use variance beta_1 for the t = 1 log-density.
      const double var = s.beta_at(1);
      double loglik = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const Vec6 mean = c.lambda0 * se3_log(compose(est.residuals[i], tt[i])).vec() +
                          c.lambda1 * se3_log(tt[i]).vec() + c.lambda2 * se3_log(prior[i]).vec();
        const Vec6 d = se3_log(t0[i]).vec() - mean;
        loglik += -d.squaredNorm() / (2.0 * var) - 3.0 * std::log(2.0 * M_PI * var);
      }
      out.residual_term = loglik;
    } else {
      out.denoising_terms[t - 2] = sq / (2.0 * s.beta_tilde_at(t));
    }
  }
  return out;
}

}  // namespace mvreg
