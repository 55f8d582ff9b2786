#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mvreg/schedule.hpp"

using namespace mvreg;

TEST_SUITE_BEGIN("schedule");

TEST_CASE("cosine schedule invariants at T = 200") {
  const NoiseSchedule s = cosine_schedule(200);
  CHECK(s.alpha_bar_at(0) == 1.0);
  CHECK(s.alpha_bar_at(200) < 1e-3);

  long double prod = 1.0L;
  for (int t = 1; t <= 200; ++t) {
    CHECK(s.beta_at(t) > 0.0);
    CHECK(s.beta_at(t) <= 0.999);
    CHECK(s.alpha_bar_at(t) < s.alpha_bar_at(t - 1));
    prod *= static_cast<long double>(s.alpha_at(t));
    CHECK(std::abs(static_cast<double>(prod) - s.alpha_bar_at(t)) < 1e-12);
    const double bt = s.beta_at(t) * (1.0 - s.alpha_bar_at(t - 1)) / (1.0 - s.alpha_bar_at(t));
    CHECK(std::abs(bt - s.beta_tilde_at(t)) < 1e-12);
  }
  CHECK_THROWS_AS(cosine_schedule(0), std::invalid_argument);
}

TEST_CASE("coefficients sum to one and close the t = 1 endpoint") {
  const NoiseSchedule s = cosine_schedule(200);
  const DenoiseCoeffs c1 = coeffs_at(s, 1);
  CHECK(c1.lambda0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(c1.lambda1) < 1e-12);
  CHECK(std::abs(c1.lambda2) < 1e-12);
  CHECK(c1.sigma == 0.0);

  for (int t = 1; t <= 200; ++t) {
    const DenoiseCoeffs c = coeffs_at(s, t);
    CHECK(std::abs(c.lambda0 + c.lambda1 + c.lambda2 - 1.0) < 1e-12);
    CHECK(c.lambda0 >= 0.0);
    CHECK(c.lambda1 >= 0.0);
  }
  CHECK_THROWS_AS(coeffs_at(s, 0), std::out_of_range);
  CHECK_THROWS_AS(coeffs_at(s, 201), std::out_of_range);
}

TEST_CASE("coefficients match an extended-precision recomputation") {
  const NoiseSchedule s = cosine_schedule(200);
  for (int t : {2, 50, 123, 200}) {
    long double abar_prev = 1.0L, abar = 1.0L;
    for (int u = 1; u <= t; ++u) {
      abar_prev = abar;
      abar *= 1.0L - static_cast<long double>(s.beta_at(u));
    }
    const long double beta = static_cast<long double>(s.beta_at(t));
    const long double alpha = 1.0L - beta;
    const long double l0 = sqrtl(abar_prev) * beta / (1.0L - abar);
    const long double l1 = sqrtl(alpha) * (1.0L - abar_prev) / (1.0L - abar);
    const long double l2 =
        1.0L + (sqrtl(abar) - 1.0L) * (sqrtl(alpha) + sqrtl(abar_prev)) / (1.0L - abar);

    const DenoiseCoeffs c = coeffs_at(s, t);
    CHECK(std::abs(c.lambda0 - static_cast<double>(l0)) < 1e-12);
    CHECK(std::abs(c.lambda1 - static_cast<double>(l1)) < 1e-12);
    CHECK(std::abs(c.lambda2 - static_cast<double>(l2)) < 1e-12);
  }
}

TEST_CASE("schedule CSV dump") {
  const NoiseSchedule s = cosine_schedule(10);
  const std::string path = "schedule_dump_test.csv";
  write_schedule_csv(s, path);
  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "t,beta,alpha_bar,beta_tilde,lambda0,lambda1,lambda2");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 10);
  std::remove(path.c_str());
}

TEST_SUITE_END();
