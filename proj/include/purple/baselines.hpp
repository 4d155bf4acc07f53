#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "purple/dataset.hpp"
#include "purple/model.hpp"
#include "purple/train.hpp"

namespace purple {

enum class EstimatorKind { negative, supervised, em, purple, external };

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(std::string_view name);

class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroupPrevalenceEstimate {
  std::string group;
  double alpha_hat = 0.0;
};

struct EstimatorOutput {
  std::vector<GroupPrevalenceEstimate> groups;
  bool converged = true;
  std::vector<std::string> notes;

  double alpha(std::string_view group) const;
};

/// Unregularized logistic fits used by the Negative/Supervised baselines.
/// The grid in `config` is honored but the defaults pass {0}.
TrainConfig default_logistic_config();

struct LogisticFit {
  LinearScorer scorer;
  std::size_t epochs_run = 0;
  double val_cross_entropy = 0.0;
};

/// Logistic regression on s (unlabeled rows taken as negatives).
LogisticFit fit_negative(const LabeledDataset& train_set, const LabeledDataset& val_set, const TrainConfig& config,
                         std::uint64_t seed);
/// Logistic regression on the true label y; throws if any y is unknown.
LogisticFit fit_supervised(const LabeledDataset& train_set, const LabeledDataset& val_set, const TrainConfig& config,
                           std::uint64_t seed);

struct EmConfig {
  std::size_t max_iters = 100;
  double tol = 1e-5;
  /// Training settings for each M-step refit (warm-started).
  TrainConfig m_step = default_logistic_config();
};

struct EmFit {
  LinearScorer scorer;
  double c_hat = 0.0;
  double initial_c = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> c_trace;
};

/// Posterior that an s=0 row is a hidden positive: f(1-c)/(1-c f). s=1 rows get 1.
std::vector<double> em_e_step(std::span<const double> f, std::span<const std::uint8_t> s, double c);
/// c = sum(s) / sum(f), capped at 1.
double em_update_c(std::span<const double> f, std::span<const std::uint8_t> s);
/// Initial labeling frequency: mean of the s-classifier's scores `g` over rows
/// with s=1, clamped to [1e-3, 1].
double em_initial_c(std::span<const double> g, std::span<const std::uint8_t> s);

/// Alternates E-steps and warm-started logistic M-steps until |dc| < tol.
/// A fit that exhausts max_iters is returned with converged = false.
EmFit fit_em(const LabeledDataset& train_set, const LabeledDataset& val_set, const EmConfig& config, std::uint64_t seed);

struct EstimatorConfig {
  TrainConfig purple;
  TrainConfig logistic = default_logistic_config();
  EmConfig em;
};

/// One contract for every method: fit on (train, val), report per-group
/// prevalence estimates on `eval`.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual EstimatorKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual EstimatorOutput estimate(const LabeledDataset& train_set, const LabeledDataset& val_set,
                                   const LabeledDataset& eval_set, std::uint64_t seed) const = 0;
};

using EstimatorFactory = std::function<std::unique_ptr<Estimator>(const EstimatorConfig&)>;

/// Registers a plug-in (e.g. a mixture-proportion estimator) under `name`.
void register_external_estimator(const std::string& name, EstimatorFactory factory);
bool has_external_estimator(const std::string& name);

/// `name` picks the plug-in when kind is external; otherwise ignored.
std::unique_ptr<Estimator> make_estimator(EstimatorKind kind, const EstimatorConfig& config, const std::string& name = "");
/// Accepts built-in kind names or registered external names.
std::unique_ptr<Estimator> make_estimator(const std::string& name, const EstimatorConfig& config);

/// Runs the method and divides group_a's estimate by group_b's.
RelativePrevalenceEstimate baseline_relative_prevalence(const Estimator& estimator, const LabeledDataset& train_set,
                                                        const LabeledDataset& val_set, const LabeledDataset& eval_set,
                                                        const std::string& group_a, const std::string& group_b,
                                                        std::uint64_t seed);
RelativePrevalenceEstimate baseline_relative_prevalence(EstimatorKind kind, const LabeledDataset& train_set,
                                                        const LabeledDataset& val_set, const LabeledDataset& eval_set,
                                                        const std::string& group_a, const std::string& group_b,
                                                        std::uint64_t seed, const EstimatorConfig& config = {});

}  // namespace purple
