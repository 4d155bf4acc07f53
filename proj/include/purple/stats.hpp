#pragma once

#include <span>
#include <stdexcept>

namespace purple {

struct TTestResult {
  double t = 0.0;
  std::size_t df = 0;
  double p = 1.0;  // two-sided
};

/// CDF of Student's t with `df` degrees of freedom, via the regularized
/// incomplete beta function.
double student_t_cdf(double t, double df);

/// Two-sided paired t-test on d_i = a_i - b_i. Throws std::invalid_argument
/// for unequal lengths, n < 2, or zero spread in the differences.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace purple
