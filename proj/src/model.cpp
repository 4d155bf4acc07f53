#include "purple/model.hpp"

#include <cmath>
#include <numeric>

#include "purple/math.hpp"
#include "purple/train.hpp"

namespace purple {

double LinearScorer::score(const FeatureMatrix& x, std::size_t row) const { return sigmoid(logit(x, row)); }

std::vector<double> LinearScorer::scores(const FeatureMatrix& x) const {
  std::vector<double> out(x.n_rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = score(x, i);
  return out;
}

double LinearScorer::mean_score(const FeatureMatrix& x) const {
  if (x.n_rows() == 0) throw DatasetError("mean_score over zero rows");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.n_rows(); ++i) sum += score(x, i);
  return sum / static_cast<double>(x.n_rows());
}

PurpleModel PurpleModel::zeros(std::size_t n_dims, std::vector<std::string> group_names) {
  PurpleModel m;
  m.scorer.weights.assign(n_dims, 0.0);
  m.theta.assign(group_names.size(), 0.0);
  m.group_names = std::move(group_names);
  return m;
}

GroupId PurpleModel::group_id(std::string_view name) const {
  for (std::size_t g = 0; g < group_names.size(); ++g)
    if (group_names[g] == name) return static_cast<GroupId>(g);
  throw DatasetError("model has no group '" + std::string(name) + "'");
}

double PurpleModel::labeling_frequency(GroupId g) const {
  if (g >= theta.size()) throw DatasetError("model has no labeling frequency for group id " + std::to_string(g));
  return sigmoid(theta[g]);
}

double predict_condition_score(const PurpleModel& model, const FeatureMatrix& x, std::size_t row) {
  return model.scorer.score(x, row);
}

double predict_condition_score(const PurpleModel& model, std::span<const double> x) {
  if (x.size() != model.n_dims()) throw DatasetError("feature row has wrong dimensionality");
  return sigmoid(std::inner_product(x.begin(), x.end(), model.scorer.weights.begin(), model.scorer.bias));
}

double predict_diagnosis(const PurpleModel& model, const FeatureMatrix& x, std::size_t row, GroupId g) {
  return model.scorer.score(x, row) * model.labeling_frequency(g);
}

double predict_diagnosis(const PurpleModel& model, std::span<const double> x, std::string_view group) {
  return predict_condition_score(model, x) * model.labeling_frequency(model.group_id(group));
}

std::vector<double> predict_diagnosis(const PurpleModel& model, const LabeledDataset& data) {
  // Dataset group ids are resolved by name so models can score files whose
  // group table is ordered differently.
  std::vector<double> c(data.n_groups());
  for (std::size_t g = 0; g < c.size(); ++g) c[g] = model.labeling_frequency(model.group_id(data.group_names[g]));
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = model.scorer.score(data.features, i) * c[data.group[i]];
  return out;
}

namespace {

struct BoundProblem {
  std::vector<double> target;
  std::vector<GroupId> group;
  Problem problem;
};

BoundProblem bind(const PurpleModel& model, const LabeledDataset& batch) {
  if (batch.size() == 0) throw DatasetError("empty batch");
  if (batch.n_dims() != model.n_dims()) throw DatasetError("batch dimensionality does not match model");
  BoundProblem b;
  b.target = as_targets(batch.s);
  std::vector<GroupId> to_model(batch.n_groups());
  for (std::size_t g = 0; g < to_model.size(); ++g) to_model[g] = model.group_id(batch.group_names[g]);
  b.group.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) b.group[i] = to_model[batch.group[i]];
  b.problem.features = &batch.features;
  b.problem.group = b.group;
  b.problem.target = b.target;
  b.problem.n_groups = model.theta.size();
  b.problem.learn_theta = true;
  return b;
}

}  // namespace

double loss(const PurpleModel& model, const LabeledDataset& batch, double lambda) {
  auto b = bind(model, batch);
  return objective(Params::from_model(model), b.problem, {}, lambda, nullptr);
}

Gradients gradients(const PurpleModel& model, const LabeledDataset& batch, double lambda) {
  auto b = bind(model, batch);
  auto params = Params::from_model(model);
  std::vector<double> g;
  objective(params, b.problem, {}, lambda, &g);
  Gradients out;
  out.weights.assign(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(params.n_dims));
  out.bias = g[params.n_dims];
  out.theta.assign(g.begin() + static_cast<std::ptrdiff_t>(params.n_dims + 1), g.end());
  return out;
}

double ratio_of_means(double numerator_mean, double denominator_mean) {
  if (!(denominator_mean >= 1e-12)) throw DatasetError("relative prevalence: denominator mean below 1e-12");
  return numerator_mean / denominator_mean;
}

double relative_prevalence_from_scores(std::span<const double> scores, std::span<const GroupId> groups, GroupId group_a,
                                       GroupId group_b) {
  double sum_a = 0.0, sum_b = 0.0;
  std::size_t n_a = 0, n_b = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (groups[i] == group_a) {
      sum_a += scores[i];
      ++n_a;
    } else if (groups[i] == group_b) {
      sum_b += scores[i];
      ++n_b;
    }
  }
  if (n_a == 0) throw DatasetError("relative prevalence: numerator group has no rows");
  if (n_b == 0) throw DatasetError("relative prevalence: denominator group has no rows");
  return ratio_of_means(sum_a / static_cast<double>(n_a), sum_b / static_cast<double>(n_b));
}

double relative_prevalence(const PurpleModel& model, const LabeledDataset& data, GroupId group_a, GroupId group_b) {
  if (model.degenerate) throw DatasetError("relative prevalence: model was fit without positive labels");
  if (data.n_dims() != model.n_dims()) throw DatasetError("relative prevalence: dimensionality mismatch");
  return relative_prevalence_from_scores(model.scorer.scores(data.features), data.group, group_a, group_b);
}

double relative_prevalence(const PurpleModel& model, const LabeledDataset& data, std::string_view group_a,
                           std::string_view group_b) {
  return relative_prevalence(model, data, data.group_id(group_a), data.group_id(group_b));
}

double relative_prevalence_vs_complement(const PurpleModel& model, const LabeledDataset& data, GroupId group) {
  if (model.degenerate) throw DatasetError("relative prevalence: model was fit without positive labels");
  auto scores = model.scorer.scores(data.features);
  std::vector<GroupId> membership(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) membership[i] = data.group[i] == group ? 0 : 1;
  return relative_prevalence_from_scores(scores, membership, 0, 1);
}

RelativePrevalenceEstimate RelativePrevalenceEstimate::from_splits(std::string group_a, std::string group_b,
                                                                   std::vector<double> per_split,
                                                                   std::optional<double> true_value) {
  RelativePrevalenceEstimate e;
  e.group_a = std::move(group_a);
  e.group_b = std::move(group_b);
  if (!per_split.empty())
    e.value = std::accumulate(per_split.begin(), per_split.end(), 0.0) / static_cast<double>(per_split.size());
  e.per_split_values = std::move(per_split);
  e.true_value = true_value;
  if (true_value) e.ratio_to_true = e.value / *true_value;
  return e;
}

}  // namespace purple
