#pragma once

#include <string>
#include <vector>

#include "purple/dataset.hpp"
#include "purple/metrics.hpp"
#include "purple/model.hpp"
#include "purple/train.hpp"

namespace purple {

struct GroupCalibration {
  std::string group;
  Calibration calibration;
};

/// Calibration of the diagnosis probability p(s=1|x,g) against s, per group.
struct CalibrationReport {
  std::size_t n_bins = 10;
  std::vector<GroupCalibration> groups;

  double max_ece() const;
};

CalibrationReport calibration_report(const PurpleModel& model, const LabeledDataset& data, std::size_t n_bins = 10);

/// Held-out fit of the constrained PURPLE model versus an unconstrained one
/// that gives every group its own scorer (and its own labeling factor, so the
/// constrained model is nested). Deltas are unconstrained minus constrained.
struct ModelFitComparison {
  double constrained_auc = 0.0;
  double unconstrained_auc = 0.0;
  double constrained_auprc = 0.0;
  double unconstrained_auprc = 0.0;
  double delta_auc = 0.0;
  double delta_auprc = 0.0;
};

/// Groups with fewer than this many training rows cannot get their own model.
inline constexpr std::size_t kMinRowsPerGroupModel = 30;

ModelFitComparison compare_constrained_unconstrained(const LabeledDataset& train_set, const LabeledDataset& val_set,
                                                     const LabeledDataset& test_set, const TrainConfig& config,
                                                     std::uint64_t seed);
/// Same comparison with an already fitted constrained model.
ModelFitComparison compare_with_model(const PurpleModel& model, const LabeledDataset& train_set,
                                      const LabeledDataset& val_set, const LabeledDataset& test_set,
                                      const TrainConfig& config, std::uint64_t seed);

struct CheckThresholds {
  double ece_warn = 0.05;
  double delta_auc_warn = 0.01;
};

enum class Verdict { pass, warn };
std::string to_string(Verdict v);

struct CheckConfig {
  TrainConfig train;
  std::size_t n_bins = 10;
  CheckThresholds thresholds;
  std::uint64_t seed = 0;
};

struct AssumptionCheckReport {
  CalibrationReport calibration;
  ModelFitComparison comparison;
  Verdict calibration_verdict = Verdict::pass;
  Verdict model_fit_verdict = Verdict::pass;
  CheckThresholds thresholds;
};

/// Calibration on the held-out test rows plus the constrained/unconstrained
/// comparison, with warn verdicts past the configured thresholds.
AssumptionCheckReport assumption_check_report(const PurpleModel& model, const DataSplit& datasets,
                                              const CheckConfig& config);

}  // namespace purple
