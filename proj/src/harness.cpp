#include "purple/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "purple/json_io.hpp"
#include "purple/rng.hpp"

namespace purple {

namespace {

const std::vector<std::string> kSemisynthModes = {"common", "high-rp", "correlated", "recognized"};
const std::vector<double> kLabelFrequencySweep = {0.1, 0.3, 0.5, 0.7, 0.9};

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class F>
void parallel_for(std::size_t n, std::size_t jobs, F&& body) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    worker();
    return;
  }
  std::vector<std::jthread> threads;
  for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
}

double group_mean(std::span<const double> v, const LabeledDataset& data, GroupId g) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.group[i] == g) {
      sum += v[i];
      ++n;
    }
  if (n == 0) throw DatasetError("group '" + data.group_names[g] + "' has no rows");
  return sum / static_cast<double>(n);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::string to_string(SuiteKind kind) {
  switch (kind) {
    case SuiteKind::separability: return "separability";
    case SuiteKind::label_frequency: return "label-frequency";
    case SuiteKind::covariate_shift: return "covariate-shift";
    case SuiteKind::violation: return "violation";
    case SuiteKind::semisynth: return "semisynth";
  }
  return "unknown";
}

SuiteKind parse_suite_kind(std::string_view name) {
  for (auto k : {SuiteKind::separability, SuiteKind::label_frequency, SuiteKind::covariate_shift, SuiteKind::violation,
                 SuiteKind::semisynth})
    if (to_string(k) == name) return k;
  throw SuiteError("unknown suite '" + std::string(name) +
                   "' (expected separability, label-frequency, covariate-shift, violation or semisynth)");
}

void ExperimentSuite::validate() const {
  if (n_splits < 2) throw SuiteError("a suite needs at least 2 splits for paired t-tests");
  if (group_a == group_b) throw SuiteError("group_a and group_b must differ");
  std::set<std::string> seen;
  for (const auto& m : methods) {
    if (!seen.insert(m).second) throw SuiteError("method '" + m + "' listed twice");
    bool known = has_external_estimator(m);
    if (!known) try {
        known = parse_estimator_kind(m) != EstimatorKind::external;
      } catch (const EstimatorError&) {
      }
    if (!known) throw SuiteError("unknown method '" + m + "'");
  }
  for (const auto& p : sweep) {
    switch (kind) {
      case SuiteKind::separability:
        if (p.label != "separable" && p.label != "nonseparable")
          throw SuiteError("separability points must be labeled separable or nonseparable");
        break;
      case SuiteKind::label_frequency:
        if (!(p.value >= 0.0 && p.value <= 1.0)) throw SuiteError("labeling frequency " + fmt(p.value) + " outside [0,1]");
        break;
      case SuiteKind::covariate_shift:
        if (!std::isfinite(p.value)) throw SuiteError("covariate-shift value must be finite");
        break;
      case SuiteKind::violation:
        if (!(p.value >= 0.0)) throw SuiteError("violation delta must be >= 0");
        break;
      case SuiteKind::semisynth:
        if (std::find(kSemisynthModes.begin(), kSemisynthModes.end(), p.label) == kSemisynthModes.end())
          throw SuiteError("unknown symptom mode '" + p.label + "'");
        if (!(p.value >= 0.0 && p.value <= 1.0)) throw SuiteError("labeling frequency " + fmt(p.value) + " outside [0,1]");
        break;
    }
  }
  try {
    if (kind == SuiteKind::semisynth) {
      if (!(semisynth.c_a >= 0.0 && semisynth.c_a <= 1.0)) throw SuiteError("c_a outside [0,1]");
    } else {
      auto g = gauss;
      g.violation_delta = 0.0;
      g.validate();
    }
    estimators.purple.validate();
    estimators.logistic.validate();
    estimators.em.m_step.validate();
  } catch (const SuiteError&) {
    throw;
  } catch (const std::exception& e) {
    throw SuiteError(e.what());
  }
}

ExperimentSuite default_suite(SuiteKind kind) {
  ExperimentSuite s;
  s.kind = kind;
  s.estimators.purple.lambda_grid = {0.0};
  switch (kind) {
    case SuiteKind::separability:
      s.sweep = {{0.0, "nonseparable"}, {1.0, "separable"}};
      break;
    case SuiteKind::label_frequency:
      for (double c : kLabelFrequencySweep) s.sweep.push_back({c, ""});
      break;
    case SuiteKind::covariate_shift:
      for (double v : {-1.0, 0.0, 0.5, 0.75, 1.0}) s.sweep.push_back({v, ""});
      break;
    case SuiteKind::violation:
      s.gauss.mean_a.assign(s.gauss.n_dims, 1.0);
      s.gauss.mean_b.assign(s.gauss.n_dims, -1.0);
      for (double d : {0.0, 0.1, 0.2, 0.3, 0.4}) s.sweep.push_back({d, ""});
      break;
    case SuiteKind::semisynth:
      s.methods = {"purple", "negative", "supervised"};
      s.estimators.purple = TrainConfig{};
      for (const auto& mode : kSemisynthModes)
        for (double c : kLabelFrequencySweep) s.sweep.push_back({c, mode});
      break;
  }
  return s;
}

double true_relative_prevalence(const LabeledDataset& data, std::string_view group_a, std::string_view group_b) {
  if (!data.latent_p) throw DatasetError("true relative prevalence needs latent_p, which this dataset lacks");
  const double den = group_mean(*data.latent_p, data, data.group_id(group_b));
  if (!(den > 0.0)) throw DatasetError("group '" + std::string(group_b) + "' has zero true prevalence");
  return group_mean(*data.latent_p, data, data.group_id(group_a)) / den;
}

double sampled_relative_prevalence(const LabeledDataset& data, std::string_view group_a, std::string_view group_b) {
  if (!data.has_true_labels()) throw DatasetError("sampled relative prevalence needs y on every row");
  std::vector<double> y(data.y.begin(), data.y.end());
  const double den = group_mean(y, data, data.group_id(group_b));
  if (!(den > 0.0)) throw DatasetError("group '" + std::string(group_b) + "' has no sampled positives");
  return group_mean(y, data, data.group_id(group_a)) / den;
}

LabeledDataset build_point_dataset(const ExperimentSuite& suite, std::size_t point) {
  if (point >= suite.sweep.size()) throw SuiteError("sweep point out of range");
  const auto& p = suite.sweep[point];
  const std::uint64_t seed = derive_seed(suite.seed, {stream_tag("data")});
  auto cfg = suite.gauss;
  switch (suite.kind) {
    case SuiteKind::separability:
      cfg.separable = p.label == "separable";
      return generate_gauss(cfg, seed);
    case SuiteKind::label_frequency:
      cfg.c[suite.group_b] = p.value;
      return generate_gauss(cfg, seed);
    case SuiteKind::covariate_shift:
      cfg.mean_b.assign(cfg.n_dims, p.value);
      return generate_gauss(cfg, seed);
    case SuiteKind::violation:
      return generate_violation(cfg, p.value, seed);
    case SuiteKind::semisynth: break;
  }

  const auto& m = suite.semisynth;
  auto synthetic = generate_visit_corpus(m.corpus, derive_seed(suite.seed, {stream_tag("corpus")}));
  const auto& corpus = synthetic.corpus;
  SymptomSet symptoms;
  if (p.label == "common") {
    symptoms = select_common_symptoms(corpus.visits, m.common_pool, m.common_pick,
                                      derive_seed(suite.seed, {stream_tag("symptoms")}));
  } else if (p.label == "high-rp") {
    auto find = [&](const std::string& name) {
      for (std::size_t g = 0; g < corpus.group_names.size(); ++g)
        if (corpus.group_names[g] == name) return static_cast<GroupId>(g);
      throw SuiteError("corpus has no group '" + name + "'");
    };
    const GroupId num = find(m.high_rp_numerator);
    const GroupId den = find(m.high_rp_numerator == suite.group_a ? suite.group_b : suite.group_a);
    symptoms = select_high_rp_symptoms(corpus.visits, corpus.group, num, den, m.high_rp_min_count, m.high_rp_top);
  } else if (p.label == "correlated") {
    symptoms = select_correlated_symptoms(corpus.visits, synthetic.anchors, m.correlated_top);
  } else {
    symptoms = synthetic.recognized;
  }
  SemiSynthConfig labels;
  labels.c = {{suite.group_a, m.c_a}, {suite.group_b, p.value}};
  labels.seed = derive_seed(suite.seed, {stream_tag("labels"), stream_tag(p.label)});
  auto data = simulate_labels(corpus, symptoms, labels);
  if (p.label == "correlated") data.features = data.features.without_columns(synthetic.anchors.indices);
  return data;
}

std::size_t RunReport::failed_cells() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const CellResult& c) { return !c.ok; }));
}

const CellSummary& RunReport::summary(std::string_view method, std::size_t point) const {
  for (const auto& s : summaries)
    if (s.method == method && s.point == point) return s;
  throw SuiteError("no summary for method '" + std::string(method) + "' at point " + std::to_string(point));
}

RunReport run_suite(const ExperimentSuite& suite, std::size_t jobs) {
  suite.validate();
  const std::size_t n_points = suite.sweep.size();
  const std::size_t n_methods = suite.methods.size();

  std::vector<std::optional<LabeledDataset>> data(n_points);
  std::vector<std::string> data_errors(n_points);
  parallel_for(n_points, jobs, [&](std::size_t p) {
    try {
      data[p] = build_point_dataset(suite, p);
    } catch (const std::exception& e) {
      data_errors[p] = std::string("data generation failed: ") + e.what();
    }
  });

  SplitSpec spec;
  spec.seed = derive_seed(suite.seed, {stream_tag("split")});
  spec.n_repeats = suite.n_splits;

  RunReport report;
  report.suite = suite;
  report.cells.resize(n_points * suite.n_splits * n_methods);
  parallel_for(report.cells.size(), jobs, [&](std::size_t idx) {
    auto& cell = report.cells[idx];
    cell.point = idx / (suite.n_splits * n_methods);
    cell.split = idx / n_methods % suite.n_splits;
    cell.method = suite.methods[idx % n_methods];
    if (!data[cell.point]) {
      cell.error = data_errors[cell.point];
      return;
    }
    try {
      auto parts = split(*data[cell.point], spec, cell.split);
      auto estimator = make_estimator(cell.method, suite.estimators);
      const auto seed = derive_seed(suite.seed, {stream_tag("fit"), cell.point, cell.split, stream_tag(cell.method)});
      auto rp = baseline_relative_prevalence(*estimator, parts.train, parts.val, parts.test, suite.group_a,
                                             suite.group_b, seed);
      cell.rp_estimate = rp.value;
      cell.converged = rp.converged;
      if (!rp.converged) cell.notes.push_back("hit the iteration cap without converging");
      cell.rp_true = true_relative_prevalence(parts.test, suite.group_a, suite.group_b);
      cell.rp_true_sampled = parts.test.has_true_labels()
                                 ? sampled_relative_prevalence(parts.test, suite.group_a, suite.group_b)
                                 : std::nan("");
      cell.ratio_to_true = cell.rp_estimate / cell.rp_true;
      if (!std::isfinite(cell.ratio_to_true)) throw EstimatorError("non-finite relative prevalence estimate");
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.ok = false;
      cell.error = e.what();
    }
  });

  for (const auto& method : suite.methods)
    for (std::size_t p = 0; p < n_points; ++p) {
      CellSummary s;
      s.method = method;
      s.point = p;
      for (const auto& c : report.cells) {
        if (c.method != method || c.point != p) continue;
        if (!c.ok) {
          s.failed_splits.push_back(c.split);
          continue;
        }
        s.splits.push_back(c.split);
        s.rp_estimates.push_back(c.rp_estimate);
        s.rp_true.push_back(c.rp_true);
        s.ratio_to_true.push_back(c.ratio_to_true);
        s.accuracy.push_back(std::abs(c.ratio_to_true - 1.0));
      }
      if (!s.splits.empty()) {
        s.mean_ratio_to_true = mean(s.ratio_to_true);
        s.mean_accuracy = mean(s.accuracy);
        s.mean_rp_estimate = mean(s.rp_estimates);
        s.mean_rp_true = mean(s.rp_true);
      }
      report.summaries.push_back(std::move(s));
    }

  if (std::find(suite.methods.begin(), suite.methods.end(), "purple") != suite.methods.end()) {
    for (const auto& method : suite.methods) {
      if (method == "purple") continue;
      for (std::size_t p = 0; p < n_points; ++p) {
        const auto& ours = report.summary("purple", p);
        const auto& theirs = report.summary(method, p);
        std::vector<double> a, b;
        for (std::size_t i = 0; i < ours.splits.size(); ++i)
          for (std::size_t j = 0; j < theirs.splits.size(); ++j)
            if (ours.splits[i] == theirs.splits[j]) {
              a.push_back(ours.accuracy[i]);
              b.push_back(theirs.accuracy[j]);
            }
        MethodComparison cmp;
        cmp.method = method;
        cmp.point = p;
        cmp.n_pairs = a.size();
        try {
          cmp.t_test = paired_t_test(a, b);
        } catch (const std::invalid_argument& e) {
          cmp.error = e.what();
        }
        report.comparisons.push_back(std::move(cmp));
      }
    }
  }
  return report;
}

std::string report_json(const RunReport& report) {
  const auto& suite = report.suite;
  const Json config = to_json(suite);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(json_hash(config)));

  auto point_json = [&](Json& j, std::size_t p) {
    j["point"] = p;
    j["sweep_value"] = suite.sweep[p].value;
    j["sweep_label"] = suite.sweep[p].label;
  };

  Json results = Json::array();
  for (const auto& c : report.cells) {
    Json j = {{"method", c.method}, {"split", c.split}, {"status", c.ok ? "ok" : "failed"}};
    point_json(j, c.point);
    if (c.ok) {
      j["rp_estimate"] = number_or_null(c.rp_estimate);
      j["rp_true"] = number_or_null(c.rp_true);
      j["rp_true_sampled"] = number_or_null(c.rp_true_sampled);
      j["ratio_to_true"] = number_or_null(c.ratio_to_true);
      j["accuracy"] = number_or_null(std::abs(c.ratio_to_true - 1.0));
      j["converged"] = c.converged;
      j["notes"] = c.notes;
    } else {
      j["error"] = c.error;
    }
    results.push_back(std::move(j));
  }

  auto opt = [](const std::optional<double>& v) { return v ? number_or_null(*v) : Json(nullptr); };
  Json summaries = Json::array();
  for (const auto& s : report.summaries) {
    Json j = {{"method", s.method},
              {"splits", s.splits},
              {"failed_splits", s.failed_splits},
              {"rp_estimates", s.rp_estimates},
              {"rp_true", s.rp_true},
              {"ratio_to_true", s.ratio_to_true},
              {"accuracy", s.accuracy},
              {"mean_ratio_to_true", opt(s.mean_ratio_to_true)},
              {"mean_accuracy", opt(s.mean_accuracy)},
              {"mean_rp_estimate", opt(s.mean_rp_estimate)},
              {"mean_rp_true", opt(s.mean_rp_true)}};
    point_json(j, s.point);
    summaries.push_back(std::move(j));
  }

  Json tests = Json::array();
  for (const auto& c : report.comparisons) {
    Json j = {{"method", c.method}, {"versus", "purple"}, {"n_pairs", c.n_pairs}};
    point_json(j, c.point);
    if (c.t_test) {
      j["t"] = number_or_null(c.t_test->t);
      j["df"] = c.t_test->df;
      j["p"] = number_or_null(c.t_test->p);
    } else {
      j["error"] = c.error;
    }
    tests.push_back(std::move(j));
  }

  Json out = {{"version", std::string(kVersion)},
              {"suite", to_string(suite.kind)},
              {"seed", suite.seed},
              {"config", config},
              {"config_hash", hash},
              {"definitions",
               {{"accuracy", "|ratio_to_true - 1| per split"},
                {"rp_true", "mean latent_p in group_a / mean latent_p in group_b over the test partition"},
                {"rp_true_sampled", "mean y in group_a / mean y in group_b over the test partition"},
                {"t_test", "two-sided paired t-test of purple accuracy minus method accuracy over shared splits"}}},
              {"results", results},
              {"summaries", summaries},
              {"t_tests", tests},
              {"n_failed_cells", report.failed_cells()}};
  return out.dump(2) + "\n";
}

std::string results_csv(const RunReport& report) {
  std::ostringstream out;
  out << "suite,method,sweep_value,sweep_label,split,rp_estimate,rp_true,rp_true_sampled,ratio_to_true\n";
  const auto suite_name = to_string(report.suite.kind);
  for (const auto& c : report.cells) {
    if (!c.ok) continue;
    const auto& p = report.suite.sweep[c.point];
    out << suite_name << ',' << c.method << ',' << fmt(p.value) << ',' << p.label << ',' << c.split << ','
        << fmt(c.rp_estimate) << ',' << fmt(c.rp_true) << ',' << fmt(c.rp_true_sampled) << ',' << fmt(c.ratio_to_true)
        << '\n';
  }
  return out.str();
}

void emit_report(const RunReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir + "': " + ec.message());
  auto write = [](const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
  };
  write(fs::path(out_dir) / "report.json", report_json(report));
  write(fs::path(out_dir) / "results.csv", results_csv(report));
}

}  // namespace purple
