#include "purple/checks.hpp"

#include <algorithm>

#include "purple/baselines.hpp"
#include "purple/rng.hpp"

namespace purple {

double CalibrationReport::max_ece() const {
  double m = 0.0;
  for (const auto& g : groups) m = std::max(m, g.calibration.ece);
  return m;
}

CalibrationReport calibration_report(const PurpleModel& model, const LabeledDataset& data, std::size_t n_bins) {
  auto preds = predict_diagnosis(model, data);
  CalibrationReport out;
  out.n_bins = n_bins;
  for (std::size_t g = 0; g < data.n_groups(); ++g) {
    std::vector<double> p;
    std::vector<std::uint8_t> s;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.group[i] == g) {
        p.push_back(preds[i]);
        s.push_back(data.s[i]);
      }
    if (p.empty()) continue;
    out.groups.push_back({data.group_names[g], calibration(p, s, n_bins)});
  }
  return out;
}

ModelFitComparison compare_with_model(const PurpleModel& model, const LabeledDataset& train_set,
                                      const LabeledDataset& val_set, const LabeledDataset& test_set,
                                      const TrainConfig& config, std::uint64_t seed) {
  if (test_set.n_groups() < 2) throw DatasetError("model-fit comparison needs at least two groups");
  auto constrained = predict_diagnosis(model, test_set);

  std::vector<double> unconstrained(test_set.size(), 0.0);
  for (std::size_t g = 0; g < test_set.n_groups(); ++g) {
    const auto& name = test_set.group_names[g];
    auto tr = train_set.group_subset(train_set.group_id(name));
    if (tr.size() < kMinRowsPerGroupModel)
      throw DatasetError("group '" + name + "' has " + std::to_string(tr.size()) +
                         " training rows; too few to fit its own model");
    auto va = val_set.group_subset(val_set.group_id(name));
    auto fitted = fit(tr, va, config, derive_seed(seed, {stream_tag("unconstrained"), g}));
    for (std::size_t i = 0; i < test_set.size(); ++i)
      if (test_set.group[i] == g) unconstrained[i] = predict_diagnosis(fitted.model, test_set.features, i, static_cast<GroupId>(g));
  }

  ModelFitComparison out;
  out.constrained_auc = auc(constrained, test_set.s);
  out.unconstrained_auc = auc(unconstrained, test_set.s);
  out.constrained_auprc = auprc(constrained, test_set.s);
  out.unconstrained_auprc = auprc(unconstrained, test_set.s);
  out.delta_auc = out.unconstrained_auc - out.constrained_auc;
  out.delta_auprc = out.unconstrained_auprc - out.constrained_auprc;
  return out;
}

ModelFitComparison compare_constrained_unconstrained(const LabeledDataset& train_set, const LabeledDataset& val_set,
                                                     const LabeledDataset& test_set, const TrainConfig& config,
                                                     std::uint64_t seed) {
  auto fitted = fit(train_set, val_set, config, derive_seed(seed, {stream_tag("constrained")}));
  return compare_with_model(fitted.model, train_set, val_set, test_set, config, seed);
}

std::string to_string(Verdict v) { return v == Verdict::pass ? "pass" : "warn"; }

AssumptionCheckReport assumption_check_report(const PurpleModel& model, const DataSplit& datasets,
                                              const CheckConfig& config) {
  AssumptionCheckReport out;
  out.thresholds = config.thresholds;
  out.calibration = calibration_report(model, datasets.test, config.n_bins);
  out.comparison = compare_with_model(model, datasets.train, datasets.val, datasets.test, config.train, config.seed);
  out.calibration_verdict = out.calibration.max_ece() > config.thresholds.ece_warn ? Verdict::warn : Verdict::pass;
  out.model_fit_verdict = out.comparison.delta_auc > config.thresholds.delta_auc_warn ? Verdict::warn : Verdict::pass;
  return out;
}

}  // namespace purple
