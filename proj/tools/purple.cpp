#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "purple/baselines.hpp"
#include "purple/checks.hpp"
#include "purple/harness.hpp"
#include "purple/json_io.hpp"
#include "purple/rng.hpp"
#include "purple/semisynth.hpp"
#include "purple/synth.hpp"

using namespace purple;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

LabelingFrequencies parse_frequencies(const std::string& text) {
  LabelingFrequencies c;
  for (const auto& item : split_list(text, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--c expects group=value pairs, got '" + item + "'");
    try {
      c[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad labeling frequency in '" + item + "'");
    }
  }
  return c;
}

void write_output(const Json& j, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << j.dump(2) << '\n';
  else
    write_json(j, path);
}

/// Accepts a bare model file or the output of `fit`.
PurpleModel load_model(const std::string& path) {
  auto j = read_json(path);
  if (j.contains("model") && !j.contains("format")) return model_from_json(j.at("model"));
  return model_from_json(j);
}

Json group_json(const LabeledDataset& data) {
  Json out = Json::array();
  for (const auto& g : group_summary(data))
    out.push_back({{"group", g.name}, {"n", g.n}, {"positives", g.positives}, {"observed_rate", g.observed_rate}});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative prevalence estimation from positive-unlabeled data"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic datasets");
  simulate->require_subcommand(1);

  auto* gauss = simulate->add_subcommand("gauss", "Two-group Gaussian data with logistic labels");
  std::size_t g_na = 10000, g_nb = 20000, g_dims = 5;
  double g_mean_b = 1.0, g_variance = 16.0, g_delta = 0.0;
  std::string g_c = "a=0.5,b=0.25", g_out;
  bool g_separable = false;
  std::uint64_t g_seed = 0;
  gauss->add_option("--n-a", g_na, "Rows in group a")->capture_default_str();
  gauss->add_option("--n-b", g_nb, "Rows in group b")->capture_default_str();
  gauss->add_option("--dims", g_dims, "Feature dimensions")->capture_default_str();
  gauss->add_option("--mean-b-scale", g_mean_b, "Group b mean is this value in every dimension")->capture_default_str();
  gauss->add_option("--variance", g_variance, "Isotropic variance")->capture_default_str();
  gauss->add_option("--c", g_c, "Labeling frequencies, e.g. a=0.5,b=0.25")->capture_default_str();
  gauss->add_flag("--separable", g_separable, "Drop the 40% of rows nearest the boundary and threshold labels");
  gauss->add_option("--violation-delta", g_delta, "Shift p(y|x) by +delta/2 in group a and -delta/2 in group b")
      ->capture_default_str();
  gauss->add_option("--seed", g_seed)->capture_default_str();
  gauss->add_option("--out", g_out, "Output path (.csv for dense, otherwise sparse)")->required();

  auto* corpus = simulate->add_subcommand("corpus", "Synthetic one-hot visit matrix");
  CorpusConfig corpus_cfg;
  std::uint64_t corpus_seed = 0;
  std::string corpus_out, anchors_out, recognized_out;
  corpus->add_option("--dims", corpus_cfg.n_dims)->capture_default_str();
  corpus->add_option("--n-a", corpus_cfg.n_a)->capture_default_str();
  corpus->add_option("--n-b", corpus_cfg.n_b)->capture_default_str();
  corpus->add_option("--seed", corpus_seed)->capture_default_str();
  corpus->add_option("--out", corpus_out, "Visit matrix path")->required();
  corpus->add_option("--anchors-out", anchors_out, "Write the anchor code list here");
  corpus->add_option("--recognized-out", recognized_out, "Write the recognized-symptom list here");

  auto* semi = simulate->add_subcommand("semisynth", "Simulate labels on a visit matrix from suspicious symptoms");
  std::string s_visits, s_symptoms, s_c = "a=0.5,b=0.5", s_out, s_anchors, s_symptoms_out, s_num = "a", s_den = "b";
  std::size_t s_pool = 50, s_pick = 25, s_min_count = 50, s_top = 0;
  std::uint64_t s_seed = 0;
  semi->add_option("--visits", s_visits, "Visit matrix")->required();
  semi->add_option("--symptoms", s_symptoms, "Symptom file, or one of common, high-rp, correlated")->required();
  semi->add_option("--c", s_c, "Labeling frequencies, e.g. a=0.5,b=0.3")->capture_default_str();
  semi->add_option("--seed", s_seed)->capture_default_str();
  semi->add_option("--pool", s_pool, "common: candidate pool size")->capture_default_str();
  semi->add_option("--pick", s_pick, "common: symptoms drawn from the pool")->capture_default_str();
  semi->add_option("--min-count", s_min_count, "high-rp: minimum occurrences per group")->capture_default_str();
  semi->add_option("--top", s_top, "high-rp/correlated: symptoms kept (default 10 / 25)");
  semi->add_option("--num-group", s_num, "high-rp: numerator group")->capture_default_str();
  semi->add_option("--den-group", s_den, "high-rp: denominator group")->capture_default_str();
  semi->add_option("--anchors", s_anchors, "correlated: anchor code file");
  semi->add_option("--symptoms-out", s_symptoms_out, "Write the selected symptom list here");
  semi->add_option("--out", s_out, "Output dataset path")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a method on repeated train/validation/test splits");
  std::string f_data, f_method = "purple", f_out;
  std::vector<double> f_grid;
  std::uint64_t f_seed = 0;
  std::size_t f_splits = 5, f_em_iters = 100;
  double f_em_tol = 1e-5;
  fit_cmd->add_option("--data", f_data)->required();
  fit_cmd->add_option("--method", f_method, "purple, negative, supervised or em")->capture_default_str();
  fit_cmd->add_option("--lambda-grid", f_grid, "L1 strengths, comma separated")->delimiter(',');
  fit_cmd->add_option("--seed", f_seed)->capture_default_str();
  fit_cmd->add_option("--splits", f_splits)->capture_default_str();
  fit_cmd->add_option("--em-max-iters", f_em_iters)->capture_default_str();
  fit_cmd->add_option("--em-tol", f_em_tol)->capture_default_str();
  fit_cmd->add_option("--out", f_out, "Output JSON (stdout when omitted)");

  // estimate
  auto* est_cmd = app.add_subcommand("estimate", "Relative prevalence from a fitted model");
  std::string e_model, e_data, e_pairs, e_out;
  std::vector<std::string> e_complement;
  est_cmd->add_option("--model", e_model)->required();
  est_cmd->add_option("--data", e_data)->required();
  est_cmd->add_option("--pairs", e_pairs, "Group pairs a:b,c:d");
  est_cmd->add_option("--vs-complement", e_complement, "Groups compared with all other rows")->delimiter(',');
  est_cmd->add_option("--out", e_out, "Output JSON (stdout when omitted)");

  // check
  auto* check_cmd = app.add_subcommand("check", "Calibration and model-fit assumption checks");
  std::string c_model, c_data, c_out;
  std::size_t c_bins = 10;
  std::uint64_t c_seed = 0;
  std::vector<double> c_grid;
  CheckThresholds c_thresholds;
  check_cmd->add_option("--model", c_model)->required();
  check_cmd->add_option("--data", c_data)->required();
  check_cmd->add_option("--bins", c_bins)->capture_default_str();
  check_cmd->add_option("--seed", c_seed, "Split seed for the unconstrained comparison")->capture_default_str();
  check_cmd->add_option("--lambda-grid", c_grid, "L1 grid for the unconstrained models")->delimiter(',');
  check_cmd->add_option("--ece-warn", c_thresholds.ece_warn)->capture_default_str();
  check_cmd->add_option("--delta-auc-warn", c_thresholds.delta_auc_warn)->capture_default_str();
  check_cmd->add_option("--out", c_out, "Output JSON (stdout when omitted)");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Run an experiment suite");
  std::string b_suite, b_methods, b_out;
  std::size_t b_splits = 5, b_jobs = 1;
  std::uint64_t b_seed = 0;
  bench->add_option("--suite", b_suite, "separability, label-frequency, covariate-shift, violation or semisynth")
      ->required();
  bench->add_option("--methods", b_methods, "Comma-separated methods (suite default when omitted)");
  bench->add_option("--splits", b_splits)->capture_default_str();
  bench->add_option("--seed", b_seed)->capture_default_str();
  bench->add_option("--out", b_out, "Output directory")->required();
  bench->add_option("--jobs", b_jobs, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gauss) {
      auto cfg = GaussSynthConfig::with_dims(g_dims);
      cfg.n_a = g_na;
      cfg.n_b = g_nb;
      cfg.mean_b.assign(g_dims, g_mean_b);
      cfg.variance = g_variance;
      cfg.c = parse_frequencies(g_c);
      cfg.separable = g_separable;
      LabeledDataset data;
      if (g_delta == 0.0) {
        data = generate_gauss(cfg, g_seed);
      } else {
        if (cfg.separable) throw ConfigError("--separable cannot be combined with --violation-delta");
        data = generate_violation(cfg, g_delta, g_seed);
      }
      write_dataset(data, g_out, format_for_path(g_out));
    } else if (*corpus) {
      auto out = generate_visit_corpus(corpus_cfg, corpus_seed);
      write_dataset(out.corpus.to_dataset(), corpus_out, format_for_path(corpus_out));
      if (!anchors_out.empty()) write_symptom_set(out.anchors, anchors_out);
      if (!recognized_out.empty()) write_symptom_set(out.recognized, recognized_out);
    } else if (*semi) {
      auto visits = VisitCorpus::from_dataset(load_dataset(s_visits, format_for_path(s_visits)));
      SymptomSet symptoms;
      std::optional<SymptomSet> anchors;
      auto group = [&](const std::string& name) {
        for (std::size_t g = 0; g < visits.group_names.size(); ++g)
          if (visits.group_names[g] == name) return static_cast<GroupId>(g);
        throw ConfigError("visit matrix has no group '" + name + "'");
      };
      if (s_symptoms == "common") {
        symptoms = select_common_symptoms(visits.visits, s_pool, s_pick, s_seed);
      } else if (s_symptoms == "high-rp") {
        symptoms = select_high_rp_symptoms(visits.visits, visits.group, group(s_num), group(s_den), s_min_count,
                                           s_top ? s_top : 10);
      } else if (s_symptoms == "correlated") {
        if (s_anchors.empty()) throw ConfigError("--symptoms correlated needs --anchors");
        anchors = load_symptom_set(s_anchors, "anchors");
        symptoms = select_correlated_symptoms(visits.visits, *anchors, s_top ? s_top : 25);
      } else {
        symptoms = load_symptom_set(s_symptoms);
      }
      auto data = simulate_labels(visits, symptoms, SemiSynthConfig{parse_frequencies(s_c), s_seed});
      if (anchors) data.features = data.features.without_columns(anchors->indices);
      write_dataset(data, s_out, format_for_path(s_out));
      if (!s_symptoms_out.empty()) write_symptom_set(symptoms, s_symptoms_out);
    } else if (*fit_cmd) {
      auto data = load_dataset(f_data, format_for_path(f_data));
      EstimatorConfig ec;
      if (!f_grid.empty()) ec.purple.lambda_grid = f_grid;
      ec.em.max_iters = f_em_iters;
      ec.em.tol = f_em_tol;
      auto kind = parse_estimator_kind(f_method);
      if (kind == EstimatorKind::external) throw ConfigError("fit supports purple, negative, supervised and em");
      SplitSpec spec;
      spec.seed = f_seed;
      spec.n_repeats = f_splits;
      spec.validate();
      Json out = {{"method", f_method}, {"seed", f_seed}, {"splits", f_splits}, {"data", f_data},
                  {"groups", group_json(data)}};
      Json fits = Json::array();
      for (std::size_t r = 0; r < f_splits; ++r) {
        auto parts = split(data, spec, r);
        const auto seed = derive_seed(f_seed, {stream_tag("fit"), r});
        Json entry = {{"split", r}};
        if (kind == EstimatorKind::purple) {
          auto result = fit(parts.train, parts.val, ec.purple, seed);
          for (const auto& w : result.warnings) std::cerr << "warning (split " << r << "): " << w << '\n';
          entry["fit"] = to_json(result);
          if (r == 0) out["model"] = to_json(result.model);
        } else {
          auto est = make_estimator(kind, ec);
          auto res = est->estimate(parts.train, parts.val, parts.test, seed);
          Json groups = Json::array();
          for (const auto& g : res.groups) groups.push_back(Json{{"group", g.group}, {"alpha_hat", g.alpha_hat}});
          entry["estimates"] = groups;
          entry["converged"] = res.converged;
          entry["notes"] = res.notes;
        }
        fits.push_back(std::move(entry));
      }
      out["fits"] = fits;
      out["config"] = kind == EstimatorKind::purple ? to_json(ec.purple)
                      : kind == EstimatorKind::em   ? to_json(ec.em)
                                                    : to_json(ec.logistic);
      write_output(out, f_out);
    } else if (*est_cmd) {
      auto model = load_model(e_model);
      auto data = load_dataset(e_data, format_for_path(e_data));
      Json pairs = Json::array();
      for (const auto& p : split_list(e_pairs, ',')) {
        auto colon = p.find(':');
        if (colon == std::string::npos) throw ConfigError("--pairs expects a:b, got '" + p + "'");
        const auto a = p.substr(0, colon), b = p.substr(colon + 1);
        pairs.push_back({{"group_a", a}, {"group_b", b}, {"relative_prevalence", relative_prevalence(model, data, a, b)}});
      }
      Json complement = Json::array();
      for (const auto& g : e_complement)
        complement.push_back(
            {{"group", g}, {"relative_prevalence", relative_prevalence_vs_complement(model, data, data.group_id(g))}});
      Json groups = Json::array();
      for (const auto& g : group_summary(data)) {
        const auto gid = data.group_id(g.name);
        double sum = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i)
          if (data.group[i] == gid) sum += predict_condition_score(model, data.features, i);
        Json entry = {{"group", g.name}, {"n", g.n}, {"mean_condition_score", sum / static_cast<double>(g.n)}};
        if (auto mg = std::find(model.group_names.begin(), model.group_names.end(), g.name);
            mg != model.group_names.end())
          entry["labeling_frequency"] = model.labeling_frequency(static_cast<GroupId>(mg - model.group_names.begin()));
        groups.push_back(std::move(entry));
      }
      write_output({{"pairs", pairs}, {"vs_complement", complement}, {"groups", groups}, {"version", kVersion}}, e_out);
    } else if (*check_cmd) {
      auto model = load_model(c_model);
      auto data = load_dataset(c_data, format_for_path(c_data));
      SplitSpec spec;
      spec.seed = c_seed;
      CheckConfig cfg;
      cfg.n_bins = c_bins;
      cfg.thresholds = c_thresholds;
      cfg.seed = c_seed;
      if (!c_grid.empty()) cfg.train.lambda_grid = c_grid;
      auto report = assumption_check_report(model, split(data, spec, 0), cfg);
      auto j = to_json(report);
      j["version"] = kVersion;
      write_output(j, c_out);
    } else if (*bench) {
      auto suite = default_suite(parse_suite_kind(b_suite));
      if (!b_methods.empty()) suite.methods = split_list(b_methods, ',');
      suite.n_splits = b_splits;
      suite.seed = b_seed;
      suite.validate();
      const auto start = std::chrono::steady_clock::now();
      auto report = run_suite(suite, b_jobs);
      emit_report(report, b_out);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::fprintf(stderr, "%s: %zu cells, %zu failed, %.1fs -> %s\n", b_suite.c_str(), report.cells.size(),
                   report.failed_cells(), secs, b_out.c_str());
      for (const auto& s : report.summaries) {
        const auto& p = suite.sweep[s.point];
        std::fprintf(stderr, "  %-10s %-12s %6g  mean ratio_to_true %s\n", s.method.c_str(), p.label.c_str(), p.value,
                     s.mean_ratio_to_true ? std::to_string(*s.mean_ratio_to_true).c_str() : "n/a (all failed)");
      }
      return report.failed_cells() == 0 ? 0 : 2;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const SuiteError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
