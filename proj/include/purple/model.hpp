#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "purple/dataset.hpp"

namespace purple {

/// sigmoid(w.x + b)
struct LinearScorer {
  std::vector<double> weights;
  double bias = 0.0;

  double logit(const FeatureMatrix& x, std::size_t row) const { return x.dot(row, weights) + bias; }
  double score(const FeatureMatrix& x, std::size_t row) const;
  std::vector<double> scores(const FeatureMatrix& x) const;
  double mean_score(const FeatureMatrix& x) const;
};

/// p(s=1|x,g) = sigmoid(w.x + b) * sigmoid(theta_g). The first factor is the
/// condition score, meaningful only up to a constant multiplicative factor;
/// the second is the group's labeling frequency.
struct PurpleModel {
  LinearScorer scorer;
  std::vector<double> theta;
  std::vector<std::string> group_names;
  /// Set when the model was fit without any positive label; its scores carry
  /// no signal and prevalence queries refuse to run.
  bool degenerate = false;

  static PurpleModel zeros(std::size_t n_dims, std::vector<std::string> group_names);

  std::size_t n_dims() const { return scorer.weights.size(); }
  GroupId group_id(std::string_view name) const;
  double labeling_frequency(GroupId g) const;
};

double predict_condition_score(const PurpleModel& model, const FeatureMatrix& x, std::size_t row);
double predict_condition_score(const PurpleModel& model, std::span<const double> x);

/// Throws DatasetError for a group without a theta entry.
double predict_diagnosis(const PurpleModel& model, const FeatureMatrix& x, std::size_t row, GroupId g);
double predict_diagnosis(const PurpleModel& model, std::span<const double> x, std::string_view group);
std::vector<double> predict_diagnosis(const PurpleModel& model, const LabeledDataset& data);

struct Gradients {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> theta;
};

/// Mean binary cross-entropy of predict_diagnosis against s plus
/// lambda * ||w||_1. Probabilities are clamped to [1e-12, 1 - 1e-12].
double loss(const PurpleModel& model, const LabeledDataset& batch, double lambda);
/// Exact gradient of `loss`; the L1 subgradient uses sign(0) = 0.
Gradients gradients(const PurpleModel& model, const LabeledDataset& batch, double lambda);

/// Ratio of group means of the condition score. Throws when the model is
/// degenerate, a group is empty, or the denominator mean is below 1e-12.
double relative_prevalence(const PurpleModel& model, const LabeledDataset& data, GroupId group_a, GroupId group_b);
double relative_prevalence(const PurpleModel& model, const LabeledDataset& data, std::string_view group_a,
                           std::string_view group_b);
double relative_prevalence_vs_complement(const PurpleModel& model, const LabeledDataset& data, GroupId group);

/// The same ratio from precomputed per-row scores.
double relative_prevalence_from_scores(std::span<const double> scores, std::span<const GroupId> groups, GroupId group_a,
                                       GroupId group_b);
double ratio_of_means(double numerator_mean, double denominator_mean);

struct RelativePrevalenceEstimate {
  std::string group_a;
  std::string group_b;
  double value = 0.0;
  std::vector<double> per_split_values;
  std::optional<double> true_value;
  std::optional<double> ratio_to_true;
  /// False when an iterative method hit its iteration cap on any group.
  bool converged = true;

  /// value = mean(per_split); ratio_to_true filled when truth is given.
  static RelativePrevalenceEstimate from_splits(std::string group_a, std::string group_b, std::vector<double> per_split,
                                                std::optional<double> true_value = std::nullopt);
};

}  // namespace purple
