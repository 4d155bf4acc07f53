#include "purple/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "purple/math.hpp"
#include "purple/metrics.hpp"
#include "purple/rng.hpp"

namespace purple {

namespace {
constexpr double kProbFloor = 1e-12;
const double kLogFloor = std::log(kProbFloor);
}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(adam_eps > 0.0)) throw std::invalid_argument("adam_eps must be positive");
  if (lambda_grid.empty()) throw std::invalid_argument("lambda_grid must not be empty");
  for (double l : lambda_grid)
    if (!(l >= 0.0)) throw std::invalid_argument("lambda values must be non-negative");
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(std::size_t n_params, double learning_rate, double beta1, double beta2, double eps, double weight_decay)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      weight_decay_(weight_decay),
      m_(n_params, 0.0),
      v_(n_params, 0.0) {}

Adam::Adam(std::size_t n_params, const TrainConfig& c)
    : Adam(n_params, c.learning_rate, c.beta1, c.beta2, c.adam_eps, c.weight_decay) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grad[k] + weight_decay_ * params[k];
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g;
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g * g;
    params[k] -= lr_ * (m_[k] / bc1) / (std::sqrt(v_[k] / bc2) + eps_);
  }
}

// ---------------------------------------------------------------------------
// Parameters

Params Params::zeros(std::size_t n_dims, std::size_t n_groups) {
  return {std::vector<double>(n_dims + 1 + n_groups, 0.0), n_dims, n_groups};
}

Params Params::from_model(const PurpleModel& model) {
  Params p = zeros(model.n_dims(), model.theta.size());
  std::copy(model.scorer.weights.begin(), model.scorer.weights.end(), p.values.begin());
  p.values[p.n_dims] = model.scorer.bias;
  std::copy(model.theta.begin(), model.theta.end(), p.values.begin() + static_cast<std::ptrdiff_t>(p.n_dims + 1));
  return p;
}

PurpleModel Params::to_model(std::vector<std::string> group_names) const {
  PurpleModel m;
  m.scorer = to_scorer();
  m.theta.assign(values.begin() + static_cast<std::ptrdiff_t>(n_dims + 1), values.end());
  m.group_names = std::move(group_names);
  return m;
}

LinearScorer Params::to_scorer() const {
  return {std::vector<double>(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n_dims)), values[n_dims]};
}

// ---------------------------------------------------------------------------
// Objective

namespace {

struct RowTerms {
  double loss;
  double d_logit;
  double d_theta;
};

// Cross-entropy of p = sigmoid(z) * sigmoid(theta) (or sigmoid(z) when the
// labeling factor is fixed) against a soft target t. 1 - p is formed as
// sigmoid(-z) + sigmoid(z) * sigmoid(-theta), which has no cancellation.
RowTerms row_terms(double z, double theta, bool learn_theta, double t) {
  const double a = sigmoid(z);
  const double a_neg = sigmoid(-z);
  double log_p = log_sigmoid(z);
  double log_q;
  double c = 1.0, c_neg = 0.0;
  if (learn_theta) {
    c = sigmoid(theta);
    c_neg = sigmoid(-theta);
    log_p += log_sigmoid(theta);
    log_q = std::log(a_neg + a * c_neg);
  } else {
    log_q = log_sigmoid(-z);
  }
  const bool low = log_p < kLogFloor;
  const bool high = log_q < kLogFloor;
  const double q = std::exp(log_q);

  RowTerms r{};
  r.loss = -t * (high ? std::log1p(-kProbFloor) : std::max(log_p, kLogFloor)) - (1.0 - t) * std::max(log_q, kLogFloor);
  if (!low && !high) {
    r.d_logit = -t * a_neg;
    r.d_theta = learn_theta ? -t * c_neg : 0.0;
  }
  if (!high) {
    r.d_logit += (1.0 - t) * c * a * a_neg / q;
    if (learn_theta) r.d_theta += (1.0 - t) * a * c * c_neg / q;
  }
  return r;
}

}  // namespace

double objective(const Params& params, const Problem& problem, std::span<const std::size_t> rows, double lambda,
                 std::vector<double>* grad) {
  const FeatureMatrix& x = *problem.features;
  const std::size_t d = params.n_dims;
  const bool all = rows.empty();
  const std::size_t n = all ? problem.size() : rows.size();
  if (n == 0) throw DatasetError("objective over zero rows");
  if (grad) grad->assign(params.values.size(), 0.0);
  auto w = params.weights();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = all ? k : rows[k];
    const double z = x.dot(i, w) + params.bias();
    const double theta = problem.learn_theta ? params.theta(problem.group[i]) : 0.0;
    const auto r = row_terms(z, theta, problem.learn_theta, problem.target[i]);
    total += r.loss;
    if (grad) {
      x.axpy(i, r.d_logit * inv_n, std::span<double>(grad->data(), d));
      (*grad)[d] += r.d_logit * inv_n;
      if (problem.learn_theta) (*grad)[d + 1 + problem.group[i]] += r.d_theta * inv_n;
    }
  }
  double penalty = 0.0;
  if (lambda > 0.0) {
    for (std::size_t j = 0; j < d; ++j) {
      penalty += std::abs(w[j]);
      if (grad && w[j] != 0.0) (*grad)[j] += lambda * (w[j] > 0.0 ? 1.0 : -1.0);
    }
  }
  return total * inv_n + lambda * penalty;
}

double cross_entropy(const Params& params, const Problem& problem) { return objective(params, problem, {}, 0.0, nullptr); }

std::vector<double> predict(const Params& params, const Problem& problem) {
  std::vector<double> out(problem.size());
  auto w = params.weights();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double p = sigmoid(problem.features->dot(i, w) + params.bias());
    if (problem.learn_theta) p *= sigmoid(params.theta(problem.group[i]));
    out[i] = p;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

TrainOutcome train(Params init, const Problem& train_set, const Problem& val_set, double lambda, const TrainConfig& config,
                   std::uint64_t seed) {
  config.validate();
  if (train_set.size() == 0 || val_set.size() == 0) throw DatasetError("training and validation sets must be non-empty");
  TrainOutcome out;
  Params p = std::move(init);
  Adam adam(p.values.size(), config);
  Engine rng(seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = config.batch_size == 0 ? order.size() : std::min(config.batch_size, order.size());
  std::vector<double> grad;

  out.params = p;
  out.best_val_loss = cross_entropy(p, val_set);
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (batch < order.size()) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      objective(p, train_set, std::span<const std::size_t>(order.data() + start, len), lambda, &grad);
      adam.step(p.values, grad);
    }
    EpochRecord rec{epoch, objective(p, train_set, {}, lambda, nullptr), cross_entropy(p, val_set)};
    out.trace.push_back(rec);
    out.epochs_run = epoch;
    if (rec.val_loss < out.best_val_loss) {
      out.best_val_loss = rec.val_loss;
      out.params = p;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return out;
}

GridOutcome train_grid(const Params& init, const Problem& train_set, const Problem& val_set,
                       std::span<const std::uint8_t> val_labels, const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  const bool has_both = std::any_of(val_labels.begin(), val_labels.end(), [](auto v) { return v != 0; }) &&
                        std::any_of(val_labels.begin(), val_labels.end(), [](auto v) { return v == 0; });
  GridOutcome out;
  bool have = false;
  for (std::size_t k = 0; k < config.lambda_grid.size(); ++k) {
    const double lambda = config.lambda_grid[k];
    auto outcome = train(init, train_set, val_set, lambda, config, derive_seed(seed, {k}));
    LambdaResult r{lambda, std::numeric_limits<double>::quiet_NaN(), outcome.best_val_loss, outcome.epochs_run};
    if (has_both) r.val_auc = auc(predict(outcome.params, val_set), val_labels);
    out.per_lambda.push_back(r);
    const bool better = !have || (has_both ? r.val_auc > out.val_auc : r.val_cross_entropy < out.best.best_val_loss);
    if (better) {
      out.best = std::move(outcome);
      out.lambda = lambda;
      out.val_auc = r.val_auc;
      have = true;
    }
  }
  return out;
}

std::vector<double> as_targets(std::span<const std::uint8_t> labels) {
  std::vector<double> t(labels.size());
  std::transform(labels.begin(), labels.end(), t.begin(), [](std::uint8_t v) { return v ? 1.0 : 0.0; });
  return t;
}

FitResult fit(const LabeledDataset& train_set, const LabeledDataset& val_set, const TrainConfig& config,
              std::uint64_t seed) {
  config.validate();
  if (train_set.n_dims() != val_set.n_dims()) throw DatasetError("fit: train and validation dimensionality differ");
  if (train_set.group_names != val_set.group_names) throw DatasetError("fit: train and validation group tables differ");
  for (std::size_t g = 0; g < val_set.n_groups(); ++g)
    if (val_set.count_group(static_cast<GroupId>(g)) > 0 && train_set.count_group(static_cast<GroupId>(g)) == 0)
      throw DatasetError("fit: group '" + val_set.group_names[g] + "' appears in validation but not in training");

  FitResult result;
  const auto n_groups = train_set.n_groups();
  if (std::none_of(train_set.s.begin(), train_set.s.end(), [](auto v) { return v != 0; })) {
    result.model = PurpleModel::zeros(train_set.n_dims(), train_set.group_names);
    result.model.degenerate = true;
    result.warnings.push_back("training data has no positive labels; the fit is degenerate");
    result.selected_lambda = config.lambda_grid.front();
    result.val_auc = std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  auto train_t = as_targets(train_set.s);
  auto val_t = as_targets(val_set.s);
  Problem tr{&train_set.features, train_set.group, train_t, n_groups, true};
  Problem va{&val_set.features, val_set.group, val_t, n_groups, true};
  auto grid = train_grid(Params::zeros(train_set.n_dims(), n_groups), tr, va, val_set.s, config, seed);

  result.model = grid.best.params.to_model(train_set.group_names);
  result.selected_lambda = grid.lambda;
  result.val_auc = grid.val_auc;
  result.val_cross_entropy = grid.best.best_val_loss;
  result.epochs_run = grid.best.epochs_run;
  result.loss_trace = std::move(grid.best.trace);
  result.per_lambda = std::move(grid.per_lambda);
  for (const auto& r : result.per_lambda)
    if (r.val_cross_entropy < result.val_cross_entropy - 1e-12) {
      result.warnings.push_back("selected lambda by validation AUC has higher validation cross-entropy than lambda=" +
                                std::to_string(r.lambda));
      break;
    }
  if (std::isnan(result.val_auc)) result.warnings.push_back("validation labels are single-class; lambda chosen by cross-entropy");
  return result;
}

}  // namespace purple
