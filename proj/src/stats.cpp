#include "purple/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

namespace purple {

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  const double x = df / (df + t * t);
  const double tail = 0.5 * boost::math::ibeta(0.5 * df, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired t-test needs equal-length samples");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("paired t-test needs at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = a[i] - b[i] - mean;
    ss += e * e;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw std::invalid_argument("paired t-test is degenerate: differences have zero spread");
  TTestResult r;
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.df = n - 1;
  const double x = static_cast<double>(r.df) / (static_cast<double>(r.df) + r.t * r.t);
  r.p = boost::math::ibeta(0.5 * static_cast<double>(r.df), 0.5, x);
  return r;
}

}  // namespace purple
