#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "purple/dataset.hpp"

namespace purple {

/// Labeling frequency c_g = p(s=1 | y=1, g) keyed by group name.
using LabelingFrequencies = std::map<std::string, double>;

/// Two isotropic Gaussian groups ("a", "b") with a logistic likelihood of the
/// signed distance to a hyperplane through the origin.
struct GaussSynthConfig {
  std::size_t n_dims = 5;
  std::vector<double> mean_a = std::vector<double>(5, -1.0);
  std::vector<double> mean_b = std::vector<double>(5, 1.0);
  double variance = 16.0;
  std::size_t n_a = 10000;
  std::size_t n_b = 20000;
  std::vector<double> hyperplane = std::vector<double>(5, 1.0);
  LabelingFrequencies c = {{"a", 0.5}, {"b", 0.25}};
  bool separable = false;
  /// Additive shift of p(y=1|x,g): +delta/2 for group a, -delta/2 for b.
  double violation_delta = 0.0;

  /// Resizes means and hyperplane to `dims`, keeping the default fill values.
  static GaussSynthConfig with_dims(std::size_t dims);
  void validate() const;
};

LabeledDataset generate_gauss(const GaussSynthConfig& config, std::uint64_t seed);

/// Thresholds latent_p at 0.5 after dropping the 40% of rows nearest the
/// decision boundary, then redraws y and s. `seed` must be the generator
/// seed so s reuses the original per-row uniforms.
LabeledDataset make_separable(const LabeledDataset& data, const LabelingFrequencies& c, std::uint64_t seed);

/// mean_a fixed at -1, mean_b = v * 1; v = -1 gives identical groups.
GaussSynthConfig shift_sweep_config(double v);

/// Covariate-shift violation: generate_gauss with `delta` applied, clamped
/// to [0, 1]. Any delta >= 0 is accepted.
LabeledDataset generate_violation(const GaussSynthConfig& config, double delta, std::uint64_t seed);

}  // namespace purple
