#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "purple/dataset.hpp"
#include "purple/model.hpp"

namespace purple {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  std::vector<double> lambda_grid = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 0.0};
  std::size_t max_epochs = 500;
  std::size_t patience = 10;
  /// Rows per Adam step; 0 means full batch.
  std::size_t batch_size = 64;

  void validate() const;
};

/// Adam with PyTorch semantics (bias-corrected moments, L2 weight decay added
/// to the gradient).
class Adam {
 public:
  Adam(std::size_t n_params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
       double weight_decay = 0.0);
  explicit Adam(std::size_t n_params, const TrainConfig& config);

  void step(std::span<double> params, std::span<const double> grad);
  std::size_t steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_;
};

/// Training rows with real-valued targets in [0,1]. When `learn_theta` is
/// false the labeling factor is fixed at 1 and the model is plain logistic
/// regression on the targets.
struct Problem {
  const FeatureMatrix* features = nullptr;
  std::span<const GroupId> group;
  std::span<const double> target;
  std::size_t n_groups = 1;
  bool learn_theta = true;

  std::size_t size() const { return target.size(); }
};

/// Flat parameter layout: [w_0 .. w_{d-1}, b, theta_0 .. theta_{G-1}].
struct Params {
  std::vector<double> values;
  std::size_t n_dims = 0;
  std::size_t n_groups = 0;

  static Params zeros(std::size_t n_dims, std::size_t n_groups);
  static Params from_model(const PurpleModel& model);
  PurpleModel to_model(std::vector<std::string> group_names) const;
  LinearScorer to_scorer() const;

  std::span<const double> weights() const { return {values.data(), n_dims}; }
  double bias() const { return values[n_dims]; }
  double theta(std::size_t g) const { return values[n_dims + 1 + g]; }
};

/// Mean cross-entropy over `rows` (all rows when empty) plus lambda*||w||_1.
/// Writes the gradient into `grad` when non-null.
double objective(const Params& params, const Problem& problem, std::span<const std::size_t> rows, double lambda,
                 std::vector<double>* grad);
/// Cross-entropy only, over every row.
double cross_entropy(const Params& params, const Problem& problem);
std::vector<double> predict(const Params& params, const Problem& problem);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainOutcome {
  Params params;
  double best_val_loss = 0.0;
  std::size_t epochs_run = 0;
  std::vector<EpochRecord> trace;
};

/// Adam from `init` with per-epoch validation cross-entropy, early stopping
/// after `patience` epochs without improvement, and restoration of the best
/// parameters.
TrainOutcome train(Params init, const Problem& train_set, const Problem& val_set, double lambda, const TrainConfig& config,
                   std::uint64_t seed);

struct LambdaResult {
  double lambda = 0.0;
  double val_auc = 0.0;
  double val_cross_entropy = 0.0;
  std::size_t epochs_run = 0;
};

struct GridOutcome {
  TrainOutcome best;
  double lambda = 0.0;
  double val_auc = 0.0;
  std::vector<LambdaResult> per_lambda;
};

/// Trains once per grid value and keeps the fit with the highest validation
/// AUC of its predictions against `val_labels` (earlier grid entries win
/// ties). With single-class validation labels the lowest validation
/// cross-entropy wins instead and val_auc is NaN.
GridOutcome train_grid(const Params& init, const Problem& train_set, const Problem& val_set,
                       std::span<const std::uint8_t> val_labels, const TrainConfig& config, std::uint64_t seed);

struct FitResult {
  PurpleModel model;
  double selected_lambda = 0.0;
  double val_auc = 0.0;
  double val_cross_entropy = 0.0;
  std::size_t epochs_run = 0;
  std::vector<EpochRecord> loss_trace;
  std::vector<LambdaResult> per_lambda;
  std::vector<std::string> warnings;
};

/// Fits the PURPLE model on s. Every group with validation rows must have
/// training rows.
FitResult fit(const LabeledDataset& train_set, const LabeledDataset& val_set, const TrainConfig& config,
              std::uint64_t seed);

std::vector<double> as_targets(std::span<const std::uint8_t> labels);

}  // namespace purple
