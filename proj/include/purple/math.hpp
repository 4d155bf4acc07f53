#pragma once

#include <cmath>

namespace purple {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// log(sigmoid(z))
inline double log_sigmoid(double z) { return -softplus(-z); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace purple
