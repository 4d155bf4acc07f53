#include "purple/json_io.hpp"

#include <cmath>
#include <fstream>

#include "purple/rng.hpp"

namespace purple {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const PurpleModel& model) {
  Json groups = Json::object();
  for (std::size_t g = 0; g < model.group_names.size(); ++g)
    groups[model.group_names[g]] = {{"theta", model.theta[g]}, {"labeling_frequency", model.labeling_frequency(g)}};
  return {{"format", "purple-model"},
          {"version", std::string(kVersion)},
          {"n_dims", model.n_dims()},
          {"weights", model.scorer.weights},
          {"bias", model.scorer.bias},
          {"group_names", model.group_names},
          {"groups", groups},
          {"degenerate", model.degenerate}};
}

PurpleModel model_from_json(const Json& j) {
  try {
    if (j.value("format", "") != "purple-model") throw DatasetError("not a purple model file");
    PurpleModel m;
    m.scorer.weights = j.at("weights").get<std::vector<double>>();
    m.scorer.bias = j.at("bias").get<double>();
    m.group_names = j.at("group_names").get<std::vector<std::string>>();
    for (const auto& name : m.group_names) m.theta.push_back(j.at("groups").at(name).at("theta").get<double>());
    m.degenerate = j.value("degenerate", false);
    if (j.at("n_dims").get<std::size_t>() != m.scorer.weights.size())
      throw DatasetError("model n_dims does not match its weight vector");
    return m;
  } catch (const Json::exception& e) {
    throw DatasetError(std::string("malformed model json: ") + e.what());
  }
}

Json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"beta1", c.beta1},           {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},           {"weight_decay", c.weight_decay}, {"lambda_grid", c.lambda_grid},
          {"max_epochs", c.max_epochs},       {"patience", c.patience},     {"batch_size", c.batch_size}};
}

Json to_json(const EmConfig& c) {
  return {{"max_iters", c.max_iters}, {"tol", c.tol}, {"m_step", to_json(c.m_step)}};
}

Json to_json(const FitResult& r) {
  Json per_lambda = Json::array();
  for (const auto& l : r.per_lambda)
    per_lambda.push_back({{"lambda", l.lambda},
                          {"val_auc", number_or_null(l.val_auc)},
                          {"val_cross_entropy", l.val_cross_entropy},
                          {"epochs_run", l.epochs_run}});
  Json trace = Json::array();
  for (const auto& e : r.loss_trace) trace.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
  return {{"model", to_json(r.model)},
          {"selected_lambda", r.selected_lambda},
          {"val_auc", number_or_null(r.val_auc)},
          {"val_cross_entropy", r.val_cross_entropy},
          {"epochs_run", r.epochs_run},
          {"per_lambda", per_lambda},
          {"loss_trace", trace},
          {"warnings", r.warnings}};
}

Json to_json(const AssumptionCheckReport& r) {
  Json groups = Json::array();
  for (const auto& g : r.calibration.groups) {
    Json bins = Json::array();
    for (const auto& b : g.calibration.bins)
      bins.push_back({{"lower", b.lower},
                      {"upper", b.upper},
                      {"count", b.count},
                      {"mean_predicted", b.mean_predicted},
                      {"empirical_rate", b.empirical_rate}});
    groups.push_back({{"group", g.group}, {"ece", g.calibration.ece}, {"bins", bins}});
  }
  const auto& c = r.comparison;
  return {{"calibration", {{"n_bins", r.calibration.n_bins}, {"max_ece", r.calibration.max_ece()}, {"groups", groups}}},
          {"model_fit",
           {{"constrained_auc", c.constrained_auc},
            {"unconstrained_auc", c.unconstrained_auc},
            {"constrained_auprc", c.constrained_auprc},
            {"unconstrained_auprc", c.unconstrained_auprc},
            {"delta_auc", c.delta_auc},
            {"delta_auprc", c.delta_auprc}}},
          {"thresholds", {{"ece_warn", r.thresholds.ece_warn}, {"delta_auc_warn", r.thresholds.delta_auc_warn}}},
          {"verdicts",
           {{"calibration", to_string(r.calibration_verdict)}, {"model_fit", to_string(r.model_fit_verdict)}}}};
}

Json to_json(const GaussSynthConfig& c) {
  return {{"n_dims", c.n_dims},       {"mean_a", c.mean_a},         {"mean_b", c.mean_b},
          {"variance", c.variance},   {"n_a", c.n_a},               {"n_b", c.n_b},
          {"hyperplane", c.hyperplane}, {"c", c.c},                 {"separable", c.separable},
          {"violation_delta", c.violation_delta}};
}

Json to_json(const CorpusConfig& c) {
  return {{"n_dims", c.n_dims},
          {"n_a", c.n_a},
          {"n_b", c.n_b},
          {"zipf_exponent", c.zipf_exponent},
          {"mean_codes_per_visit", c.mean_codes_per_visit},
          {"max_code_rate", c.max_code_rate},
          {"group_log_rate_sd", c.group_log_rate_sd},
          {"n_topics", c.n_topics},
          {"topic_size", c.topic_size},
          {"topic_prevalence", c.topic_prevalence},
          {"topic_code_rate", c.topic_code_rate}};
}

Json to_json(const ExperimentSuite& s) {
  Json sweep = Json::array();
  for (const auto& p : s.sweep) sweep.push_back({{"value", p.value}, {"label", p.label}});
  Json j = {{"suite", to_string(s.kind)},
            {"methods", s.methods},
            {"sweep", sweep},
            {"n_splits", s.n_splits},
            {"seed", s.seed},
            {"group_a", s.group_a},
            {"group_b", s.group_b},
            {"estimators",
             {{"purple", to_json(s.estimators.purple)},
              {"logistic", to_json(s.estimators.logistic)},
              {"em", to_json(s.estimators.em)}}}};
  if (s.kind == SuiteKind::semisynth) {
    const auto& m = s.semisynth;
    j["semisynth"] = {{"corpus", to_json(m.corpus)},
                      {"c_a", m.c_a},
                      {"common_pool", m.common_pool},
                      {"common_pick", m.common_pick},
                      {"high_rp_min_count", m.high_rp_min_count},
                      {"high_rp_top", m.high_rp_top},
                      {"high_rp_numerator", m.high_rp_numerator},
                      {"correlated_top", m.correlated_top}};
  } else {
    j["gauss"] = to_json(s.gauss);
  }
  return j;
}

std::uint64_t json_hash(const Json& j) { return stream_tag(j.dump()); }

void write_json(const Json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

Json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::runtime_error("'" + path + "': " + e.what());
  }
}

}  // namespace purple
