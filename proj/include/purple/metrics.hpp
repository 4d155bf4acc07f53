#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace purple {

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mann-Whitney AUC: P(score of random positive > score of random negative),
/// ties counted 1/2. Requires both classes.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Average precision with scores sorted descending and ties kept in input
/// order. Requires at least one positive.
double auprc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  double mean_predicted = 0.0;
  double empirical_rate = 0.0;
  std::size_t count = 0;
};

struct Calibration {
  std::vector<CalibrationBin> bins;  // every bin, empty ones with count 0
  double ece = 0.0;
};

/// Equal-width bins on [0,1]; the last bin is closed at 1. Empty bins do not
/// contribute to the ECE.
Calibration calibration(std::span<const double> preds, std::span<const std::uint8_t> labels, std::size_t n_bins = 10);

}  // namespace purple
