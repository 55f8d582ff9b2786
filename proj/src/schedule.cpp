#include "mvreg/schedule.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mvreg {

NoiseSchedule cosine_schedule(int steps) {
  if (steps < 1) throw std::invalid_argument("cosine_schedule: steps must be >= 1");
  const double s = 0.008;
  auto f = [&](double t) {
    const double x = ((t / steps + s) / (1.0 + s)) * M_PI / 2.0;
    const double c = std::cos(x);
    return c * c;
  };

  NoiseSchedule sch;
  sch.steps = steps;
  sch.beta.resize(steps);
  sch.alpha.resize(steps);
  sch.alpha_bar.resize(steps + 1);
  sch.beta_tilde.resize(steps);

  const double f0 = f(0.0);
  double abar_prev = 1.0;
  sch.alpha_bar[0] = 1.0;
  for (int t = 1; t <= steps; ++t) {
    const double abar_raw = f(static_cast<double>(t)) / f0;
    double beta = 1.0 - abar_raw / abar_prev;
    if (beta > 0.999) beta = 0.999;
    sch.beta[t - 1] = beta;
    sch.alpha[t - 1] = 1.0 - beta;
    // Recompute the product from the clipped beta so alpha_bar stays the
    // exact running product (and stays > 0 after the clipped final step).
    sch.alpha_bar[t] = abar_prev * (1.0 - beta);
    sch.beta_tilde[t - 1] = beta * (1.0 - abar_prev) / (1.0 - sch.alpha_bar[t]);
    abar_prev = sch.alpha_bar[t];
  }
  return sch;
}

DenoiseCoeffs coeffs_at(const NoiseSchedule& s, int t) {
  if (t < 1 || t > s.steps) throw std::out_of_range("coeffs_at: t out of range 1..T");
  const double abar_t = s.alpha_bar_at(t);
  const double abar_prev = s.alpha_bar_at(t - 1);
  const double alpha_t = s.alpha_at(t);
  const double one_m = 1.0 - abar_t;

  DenoiseCoeffs c;
  c.lambda0 = std::sqrt(abar_prev) * s.beta_at(t) / one_m;
  c.lambda1 = std::sqrt(alpha_t) * (1.0 - abar_prev) / one_m;
  c.lambda2 = 1.0 + (std::sqrt(abar_t) - 1.0) * (std::sqrt(alpha_t) + std::sqrt(abar_prev)) / one_m;
  c.sigma = std::sqrt(s.beta_tilde_at(t));
  return c;
}

void write_schedule_csv(const NoiseSchedule& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_schedule_csv: cannot open " + path);
  out << "t,beta,alpha_bar,beta_tilde,lambda0,lambda1,lambda2\n";
  char buf[512];
  for (int t = 1; t <= s.steps; ++t) {
    const DenoiseCoeffs c = coeffs_at(s, t);
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t, s.beta_at(t),
                  s.alpha_bar_at(t), s.beta_tilde_at(t), c.lambda0, c.lambda1, c.lambda2);
    out << buf;
  }
}

}  // namespace mvreg
