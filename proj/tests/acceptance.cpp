// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "oracles.hpp"
#include "purple/checks.hpp"
#include "purple/harness.hpp"
#include "purple/metrics.hpp"
#include "purple/model.hpp"
#include "purple/synth.hpp"

using namespace purple;

namespace {

struct Outcome {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Outcome> g_outcomes;

void record(int id, bool pass, const std::string& detail) {
  g_outcomes.push_back({id, pass, detail});
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

bool within(std::optional<double> v, double lo, double hi) { return v && *v >= lo && *v <= hi; }

std::string show(std::optional<double> v) { return v ? fmt(*v) : std::string("n/a"); }

std::size_t point_labeled(const ExperimentSuite& suite, const std::string& label) {
  for (std::size_t p = 0; p < suite.sweep.size(); ++p)
    if (suite.sweep[p].label == label) return p;
  throw SuiteError("no sweep point labeled " + label);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double mean_s_ratio(const LabeledDataset& d) {
  double sa = 0, na = 0, sb = 0, nb = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    (d.group[i] == 0 ? sa : sb) += d.s[i];
    (d.group[i] == 0 ? na : nb) += 1;
  }
  return (sa / na) / (sb / nb);
}

void separability(std::size_t jobs, const std::filesystem::path& scratch) {
  auto suite = default_suite(SuiteKind::separability);
  const auto nonsep = point_labeled(suite, "nonseparable");
  const auto sep = point_labeled(suite, "separable");

  // Criterion 1 runtime: PURPLE alone on the nonseparable data, one thread.
  auto purple_only = suite;
  purple_only.methods = {"purple"};
  purple_only.sweep = {suite.sweep[nonsep]};
  auto t0 = std::chrono::steady_clock::now();
  auto single = run_suite(purple_only, 1);
  const double purple_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  auto report = run_suite(suite, jobs);
  const double full_seconds = seconds_since(t0);
  emit_report(report, (scratch / "separability_a").string());

  {
    const auto& s = single.summary("purple", 0);
    const bool ok = within(s.mean_ratio_to_true, 0.9, 1.1) && purple_seconds < 180.0 && single.failed_cells() == 0;
    record(1, ok,
           "purple nonseparable mean ratio " + show(s.mean_ratio_to_true) + " in [0.9,1.1]; runtime " +
               fmt(purple_seconds, 1) + "s < 180s single-threaded");
  }
  {
    const auto& sup = report.summary("supervised", nonsep);
    const auto& neg = report.summary("negative", nonsep);
    const double c_ratio = suite.gauss.c.at("a") / suite.gauss.c.at("b");
    const double lo = c_ratio * 0.85, hi = c_ratio * 1.15;
    // Independent route: observed label-rate ratio over true prevalence ratio.
    auto data = build_point_dataset(suite, nonsep);
    const double direct = mean_s_ratio(data) / true_relative_prevalence(data, suite.group_a, suite.group_b);
    const bool ok = within(sup.mean_ratio_to_true, 0.95, 1.05) && within(neg.mean_ratio_to_true, lo, hi) &&
                    direct >= lo && direct <= hi;
    record(2, ok,
           "supervised " + show(sup.mean_ratio_to_true) + " in [0.95,1.05]; negative " + show(neg.mean_ratio_to_true) +
               " and direct mean-of-s " + fmt(direct) + " in [" + fmt(lo, 2) + "," + fmt(hi, 2) + "]");
  }
  {
    const auto& p_sep = report.summary("purple", sep);
    const auto& em_sep = report.summary("em", sep);
    const auto& p_non = report.summary("purple", nonsep);
    const auto& em_non = report.summary("em", nonsep);
    std::optional<double> p_value;
    for (const auto& c : report.comparisons)
      if (c.method == "em" && c.point == nonsep && c.t_test) p_value = c.t_test->p;
    const bool em_worse = p_non.mean_accuracy && em_non.mean_accuracy && *em_non.mean_accuracy > *p_non.mean_accuracy;
    const bool ok = within(p_sep.mean_ratio_to_true, 0.85, 1.15) && within(em_sep.mean_ratio_to_true, 0.85, 1.15) &&
                    em_worse && p_value && *p_value < 0.05;
    record(3, ok,
           "separable purple " + show(p_sep.mean_ratio_to_true) + ", em " + show(em_sep.mean_ratio_to_true) +
               " in [0.85,1.15]; nonseparable |r-1| em " + show(em_non.mean_accuracy) + " > purple " +
               show(p_non.mean_accuracy) + ", paired t-test p " + show(p_value) + " < 0.05");
  }

  // Criterion 10: a second full run, different worker count, same bytes.
  t0 = std::chrono::steady_clock::now();
  auto again = run_suite(suite, std::max<std::size_t>(4, jobs));
  emit_report(again, (scratch / "separability_b").string());
  const bool same_json = slurp(scratch / "separability_a" / "report.json") == slurp(scratch / "separability_b" / "report.json");
  const bool same_csv = slurp(scratch / "separability_a" / "results.csv") == slurp(scratch / "separability_b" / "results.csv");
  record(10, same_json && same_csv && !slurp(scratch / "separability_a" / "report.json").empty(),
         std::string("separability suite run twice (") + std::to_string(jobs) + " vs " +
             std::to_string(std::max<std::size_t>(4, jobs)) + " workers, " + fmt(full_seconds, 1) + "s + " +
             fmt(seconds_since(t0), 1) + "s): report.json " + (same_json ? "identical" : "differs") +
             ", results.csv " + (same_csv ? "identical" : "differs"));
}

void covariate_shift(std::size_t jobs) {
  auto suite = default_suite(SuiteKind::covariate_shift);
  auto report = run_suite(suite, jobs);
  bool ok = report.failed_cells() == 0;
  std::string detail = "purple mean ratio by v:";
  for (std::size_t p = 0; p < suite.sweep.size(); ++p) {
    const auto& s = report.summary("purple", p);
    ok = ok && within(s.mean_ratio_to_true, 0.85, 1.15);
    detail += " " + fmt(suite.sweep[p].value, 2) + "->" + show(s.mean_ratio_to_true);
  }
  record(4, ok, detail + " (each in [0.85,1.15])");
}

void violation(std::size_t jobs) {
  auto suite = default_suite(SuiteKind::violation);
  auto report = run_suite(suite, jobs);
  bool ok = report.failed_cells() == 0;
  std::string detail;
  for (std::size_t p = 0; p < suite.sweep.size(); ++p) {
    const auto& s = report.summary("purple", p);
    const double delta = suite.sweep[p].value;
    if (!s.mean_rp_estimate || !s.mean_rp_true) {
      ok = false;
      continue;
    }
    const double est = *s.mean_rp_estimate, truth = *s.mean_rp_true;
    ok = ok && est <= truth * 1.1;
    if (delta >= 0.2 - 1e-12) ok = ok && est < truth * 0.95;
    if (truth > 1.1) ok = ok && est > 1.0;
    detail += " d=" + fmt(delta, 1) + ": est " + fmt(est, 3) + " / true " + fmt(truth, 3) + ";";
  }
  record(5, ok, "purple estimates <= 1.1 true, < 0.95 true for d>=0.2, > 1 when true > 1.1:" + detail);
}

void semisynth(std::size_t jobs) {
  auto suite = default_suite(SuiteKind::semisynth);
  const auto& corpus = suite.semisynth.corpus;
  std::set<std::string> modes;
  std::set<double> c_values;
  for (const auto& p : suite.sweep) {
    modes.insert(p.label);
    c_values.insert(p.value);
  }
  const bool shape_ok = corpus.n_dims >= 1000 && corpus.n_a + corpus.n_b >= 20000 && modes.size() == 4 &&
                        c_values == std::set<double>{0.1, 0.3, 0.5, 0.7, 0.9} && suite.semisynth.c_a == 0.5;

  auto t0 = std::chrono::steady_clock::now();
  auto report = run_suite(suite, jobs);
  const double secs = seconds_since(t0);

  bool purple_ok = report.failed_cells() == 0;
  double purple_lo = INFINITY, purple_hi = -INFINITY;
  for (std::size_t p = 0; p < suite.sweep.size(); ++p) {
    const auto& s = report.summary("purple", p);
    purple_ok = purple_ok && within(s.mean_ratio_to_true, 0.8, 1.2);
    if (s.mean_ratio_to_true) {
      purple_lo = std::min(purple_lo, *s.mean_ratio_to_true);
      purple_hi = std::max(purple_hi, *s.mean_ratio_to_true);
    }
  }
  // Negative's spread across the c_b sweep, per symptom mode.
  bool spread_ok = true;
  std::string spreads;
  for (const auto& mode : modes) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t p = 0; p < suite.sweep.size(); ++p) {
      if (suite.sweep[p].label != mode) continue;
      const auto& s = report.summary("negative", p);
      if (!s.mean_ratio_to_true) {
        spread_ok = false;
        continue;
      }
      lo = std::min(lo, *s.mean_ratio_to_true);
      hi = std::max(hi, *s.mean_ratio_to_true);
    }
    spread_ok = spread_ok && hi >= 2.0 * lo;
    spreads += " " + mode + " " + fmt(hi / lo, 2) + "x";
  }
  record(6, shape_ok && purple_ok && spread_ok && secs < 1200.0,
         std::to_string(corpus.n_dims) + " dims, " + std::to_string(corpus.n_a + corpus.n_b) + " rows, " +
             std::to_string(modes.size()) + " modes; purple ratios in [" + fmt(purple_lo) + "," + fmt(purple_hi) +
             "] within [0.8,1.2]; negative spread" + spreads + " (>= 2x); runtime " + fmt(secs, 1) + "s < 1200s");
}

void assumption_checks() {
  const auto gauss_train = default_suite(SuiteKind::separability).estimators.purple;
  auto run = [&](const LabeledDataset& data, std::uint64_t seed) {
    SplitSpec spec;
    spec.seed = seed;
    auto parts = split(data, spec, 0);
    auto fitted = fit(parts.train, parts.val, gauss_train, seed);
    CheckConfig cfg;
    cfg.train = gauss_train;
    cfg.seed = seed;
    return assumption_check_report(fitted.model, parts, cfg);
  };

  bool well_ok = true;
  double worst_ece = 0, worst_delta = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto r = run(generate_gauss(GaussSynthConfig{}, seed), seed);
    worst_ece = std::max(worst_ece, r.calibration.max_ece());
    worst_delta = std::max(worst_delta, std::abs(r.comparison.delta_auc));
    well_ok = well_ok && r.calibration.max_ece() <= 0.05 && std::abs(r.comparison.delta_auc) <= 0.01;
  }

  const auto violated = default_suite(SuiteKind::violation).gauss;
  bool flag_ok = true;
  std::string deltas;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto r = run(generate_violation(violated, 0.4, seed), seed);
    flag_ok = flag_ok && r.comparison.delta_auc > 0.01;
    deltas += " " + fmt(r.comparison.delta_auc);
  }
  record(7, well_ok && flag_ok,
         "well-specified over 5 seeds: max ECE " + fmt(worst_ece) + " <= 0.05, max |delta_auc| " + fmt(worst_delta) +
             " <= 0.01; delta=0.4 violation delta_auc" + deltas + " (each must be > 0.01)");
}

void gradients_fd() {
  std::mt19937_64 rng(2024);
  double worst = 0;
  std::size_t bad = 0, total = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto c = oracles::random_gradient_case(rng, trial);
    for (double rel : oracles::gradient_relative_errors(c, 1e-6)) {
      worst = std::max(worst, rel);
      bad += !(rel < 1e-5);
      ++total;
    }
  }
  record(8, bad == 0,
         "100 instances, " + std::to_string(total) + " gradient entries, worst relative error " + fmt(worst * 1e6, 3) +
             "e-6 < 1e-5");
}

void oracle_equivalence() {
  std::mt19937_64 rng(11);
  std::size_t auc_bad = 0, auprc_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = oracles::random_ranking_case(rng);
    auc_bad += auc(c.scores, c.labels) != oracles::auc_pairs(c.scores, c.labels);
    auprc_bad += auprc(c.scores, c.labels) != oracles::auprc_ranks(c.scores, c.labels);
  }
  std::mt19937_64 rng2(77);
  std::size_t rp_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = oracles::random_support_case(rng2);
    rp_bad += relative_prevalence_from_scores(c.p, c.groups, 0, 1) != c.enumerated;
  }
  record(9, auc_bad == 0 && auprc_bad == 0 && rp_bad == 0,
         "exact mismatches: auc " + std::to_string(auc_bad) + "/1000, auprc " + std::to_string(auprc_bad) +
             "/1000, relative prevalence vs support enumeration " + std::to_string(rp_bad) + "/1000");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::filesystem::path scratch =
      argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::temp_directory_path() / "purple_acceptance";
  std::filesystem::create_directories(scratch);
  std::printf("acceptance run with %zu worker(s), reports under %s\n", jobs, scratch.string().c_str());

  try {
    gradients_fd();
    oracle_equivalence();
    assumption_checks();
    separability(jobs, scratch);
    covariate_shift(jobs);
    violation(jobs);
    semisynth(jobs);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }

  std::sort(g_outcomes.begin(), g_outcomes.end(), [](const Outcome& a, const Outcome& b) { return a.id < b.id; });
  std::size_t failed = 0;
  std::printf("\nsummary\n");
  for (const auto& o : g_outcomes) {
    std::printf("criterion %2d: %s\n", o.id, o.pass ? "PASS" : "FAIL");
    failed += !o.pass;
  }
  std::printf("%zu/%zu criteria pass\n", g_outcomes.size() - failed, g_outcomes.size());
  return failed == 0 ? 0 : 1;
}
