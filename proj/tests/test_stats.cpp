#include <doctest.h>

#include <cmath>
#include <vector>

#include "purple/stats.hpp"

using namespace purple;

namespace {

double t_density(double u, double df) {
  const double log_norm = std::lgamma(0.5 * (df + 1)) - std::lgamma(0.5 * df) - 0.5 * std::log(df * M_PI);
  return std::exp(log_norm - 0.5 * (df + 1) * std::log1p(u * u / df));
}

// 0.5 + integral of the density from 0 to t, composite Simpson.
double t_cdf_quadrature(double t, double df) {
  const int n = 20000;
  const double h = t / n;
  double sum = t_density(0, df) + t_density(t, df);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4 : 2) * t_density(i * h, df);
  return 0.5 + sum * h / 3;
}

}  // namespace

TEST_CASE("t distribution CDF matches quadrature of the density") {
  for (int df = 2; df <= 60; df += 1)
    for (double t = -10; t <= 10; t += 0.5) REQUIRE(std::abs(student_t_cdf(t, df) - t_cdf_quadrature(t, df)) < 1e-6);
  CHECK(student_t_cdf(0.0, 4) == 0.5);
  // Cauchy closed form.
  CHECK(student_t_cdf(1.0, 1) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK_THROWS(student_t_cdf(1.0, 0));
}

TEST_CASE("paired t-test examples") {
  std::vector<double> b = {2, 2, 2, 2, 2};
  std::vector<double> a = {3, 1, 3, 1, 2};
  auto r = paired_t_test(a, b);
  CHECK(r.t == 0.0);
  CHECK(r.df == 4);
  CHECK(r.p == doctest::Approx(1.0).epsilon(1e-14));

  std::vector<double> c = {3, 4, 5, 6, 7};
  auto s = paired_t_test(c, b);
  // d = 1..5: mean 3, sd sqrt(2.5).
  CHECK(s.t == doctest::Approx(3.0 / (std::sqrt(2.5) / std::sqrt(5.0))).epsilon(1e-14));
  CHECK(s.p == doctest::Approx(2 * (1 - t_cdf_quadrature(s.t, 4))).epsilon(1e-6));

  auto flipped = paired_t_test(b, c);
  CHECK(flipped.t == -s.t);
  CHECK(flipped.p == s.p);
}

TEST_CASE("paired t-test rejects degenerate input") {
  std::vector<double> a = {1, 2, 3}, b = {0, 1, 2};
  CHECK_THROWS_AS(paired_t_test(a, b), std::invalid_argument);
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1}, std::vector<double>{0}), std::invalid_argument);
  CHECK_THROWS_AS(paired_t_test(a, std::vector<double>{1, 2}), std::invalid_argument);
}
