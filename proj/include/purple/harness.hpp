#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "purple/baselines.hpp"
#include "purple/dataset.hpp"
#include "purple/semisynth.hpp"
#include "purple/stats.hpp"
#include "purple/synth.hpp"

namespace purple {

inline constexpr std::string_view kVersion = "purple 0.1.0";

class SuiteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SuiteKind { separability, label_frequency, covariate_shift, violation, semisynth };

std::string to_string(SuiteKind kind);
SuiteKind parse_suite_kind(std::string_view name);

/// One x-axis position of a suite. `label` distinguishes points that share a
/// value (semisynth symptom modes) or have no natural number (separability).
struct SweepPoint {
  double value = 0.0;
  std::string label;
};

struct SemisynthSettings {
  CorpusConfig corpus;
  double c_a = 0.5;
  std::size_t common_pool = 50;
  std::size_t common_pick = 25;
  std::size_t high_rp_min_count = 50;
  std::size_t high_rp_top = 10;
  /// Group whose rate is the numerator of the high-rp ranking.
  std::string high_rp_numerator = "a";
  std::size_t correlated_top = 25;
};

struct ExperimentSuite {
  SuiteKind kind = SuiteKind::separability;
  std::vector<std::string> methods = {"purple", "negative", "em", "supervised"};
  std::vector<SweepPoint> sweep;
  std::size_t n_splits = 5;
  std::uint64_t seed = 0;
  /// Base generator for the Gauss suites; each point overrides one knob.
  GaussSynthConfig gauss;
  SemisynthSettings semisynth;
  EstimatorConfig estimators;
  std::string group_a = "a";
  std::string group_b = "b";

  void validate() const;
};

/// Desk-scale defaults for a suite: its sweep, generator settings and method
/// list. Gauss suites fit PURPLE without L1; semisynth uses the full grid and
/// leaves EM out.
ExperimentSuite default_suite(SuiteKind kind);

/// Mean latent_p over group a rows divided by the mean over group b rows.
double true_relative_prevalence(const LabeledDataset& data, std::string_view group_a, std::string_view group_b);
/// The same ratio from sampled y.
double sampled_relative_prevalence(const LabeledDataset& data, std::string_view group_a, std::string_view group_b);

/// Dataset for one sweep point, as handed to every method.
LabeledDataset build_point_dataset(const ExperimentSuite& suite, std::size_t point);

struct CellResult {
  std::size_t point = 0;
  std::size_t split = 0;
  std::string method;
  bool ok = false;
  std::string error;
  double rp_estimate = 0.0;
  double rp_true = 0.0;
  double rp_true_sampled = 0.0;
  double ratio_to_true = 0.0;
  bool converged = true;
  std::vector<std::string> notes;
};

struct CellSummary {
  std::string method;
  std::size_t point = 0;
  /// Successful splits only; failed splits are listed, never filled in.
  std::vector<std::size_t> splits;
  std::vector<double> rp_estimates;
  std::vector<double> rp_true;
  std::vector<double> ratio_to_true;
  std::vector<double> accuracy;
  std::vector<std::size_t> failed_splits;
  std::optional<double> mean_ratio_to_true;
  std::optional<double> mean_accuracy;
  std::optional<double> mean_rp_estimate;
  std::optional<double> mean_rp_true;
};

/// PURPLE's per-split accuracy against another method's, over the splits both
/// completed.
struct MethodComparison {
  std::string method;
  std::size_t point = 0;
  std::size_t n_pairs = 0;
  std::optional<TTestResult> t_test;
  std::string error;
};

struct RunReport {
  ExperimentSuite suite;
  std::vector<CellResult> cells;
  std::vector<CellSummary> summaries;
  std::vector<MethodComparison> comparisons;

  std::size_t failed_cells() const;
  const CellSummary& summary(std::string_view method, std::size_t point) const;
};

/// Runs every (sweep point, split, method) cell on up to `jobs` threads.
/// Results do not depend on `jobs`.
RunReport run_suite(const ExperimentSuite& suite, std::size_t jobs = 1);

/// Writes report.json and results.csv into `out_dir` (created if missing).
void emit_report(const RunReport& report, const std::string& out_dir);
std::string report_json(const RunReport& report);
std::string results_csv(const RunReport& report);

}  // namespace purple
