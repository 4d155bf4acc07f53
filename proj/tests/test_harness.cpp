#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "purple/harness.hpp"
#include "support.hpp"

using namespace purple;
using testing_support::make_dense;

namespace {

ExperimentSuite tiny_label_frequency() {
  auto suite = default_suite(SuiteKind::label_frequency);
  suite.gauss.n_a = 300;
  suite.gauss.n_b = 600;
  suite.n_splits = 2;
  suite.methods = {"purple", "negative"};
  suite.sweep = {{0.0, ""}, {0.5, ""}};
  suite.estimators.purple.max_epochs = 30;
  suite.estimators.logistic.max_epochs = 30;
  return suite;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("true relative prevalence") {
  auto d = make_dense(1, {0, 0, 0, 0}, {0, 0, 1, 1}, {0, 0, 0, 0});
  CHECK_THROWS_AS(true_relative_prevalence(d, "a", "b"), DatasetError);
  d.latent_p = std::vector<double>{0.3, 0.3, 0.3, 0.3};
  CHECK(true_relative_prevalence(d, "a", "b") == 1.0);
  d.latent_p = std::vector<double>{1.0, 0.0, 0.5, 0.5};
  CHECK(true_relative_prevalence(d, "a", "b") == 1.0);
  d.latent_p = std::vector<double>{0.6, 0.2, 0.1, 0.1};
  CHECK(true_relative_prevalence(d, "a", "b") == doctest::Approx(4.0));
  d.latent_p = std::vector<double>{0.6, 0.2, 0.0, 0.0};
  CHECK_THROWS_AS(true_relative_prevalence(d, "a", "b"), DatasetError);
}

TEST_CASE("sampled labels agree with latent prevalence") {
  auto data = generate_gauss(GaussSynthConfig{}, 21);
  for (GroupId g : {0u, 1u}) {
    double y = 0, p = 0, n = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data.group[i] == g) {
        y += data.y[i];
        p += (*data.latent_p)[i];
        n += 1;
      }
    const double rate = p / n;
    CHECK(std::abs(y / n - rate) < 3 * std::sqrt(rate * (1 - rate) / n));
  }
  CHECK(sampled_relative_prevalence(data, "a", "b") ==
        doctest::Approx(true_relative_prevalence(data, "a", "b")).epsilon(0.1));
}

TEST_CASE("suite validation") {
  auto s = tiny_label_frequency();
  s.n_splits = 1;
  CHECK_THROWS_AS(s.validate(), SuiteError);
  s = tiny_label_frequency();
  s.methods = {"purple", "purple"};
  CHECK_THROWS_AS(s.validate(), SuiteError);
  s = tiny_label_frequency();
  s.methods = {"bogus"};
  CHECK_THROWS_AS(s.validate(), SuiteError);
  s = tiny_label_frequency();
  s.sweep = {{1.5, ""}};
  CHECK_THROWS_AS(s.validate(), SuiteError);
  CHECK_THROWS_AS(parse_suite_kind("nope"), SuiteError);
  for (auto k : {SuiteKind::separability, SuiteKind::label_frequency, SuiteKind::covariate_shift, SuiteKind::violation,
                 SuiteKind::semisynth}) {
    CHECK(parse_suite_kind(to_string(k)) == k);
    CHECK_NOTHROW(default_suite(k).validate());
  }
}

TEST_CASE("empty sweep gives a valid report with no results") {
  auto s = tiny_label_frequency();
  s.sweep.clear();
  auto report = run_suite(s, 1);
  auto j = nlohmann::json::parse(report_json(report));
  CHECK(j["results"].is_array());
  CHECK(j["results"].empty());
  CHECK(j["n_failed_cells"] == 0);
  CHECK(count_lines(results_csv(report)) == 1);
}

TEST_CASE("failed cells are reported, not filled in") {
  auto s = tiny_label_frequency();
  auto report = run_suite(s, 1);
  CHECK(report.cells.size() == 2 * 2 * 2);
  // c_b = 0 leaves group b without labels: the Negative fit cannot run there.
  const auto& neg0 = report.summary("negative", 0);
  CHECK(neg0.failed_splits.size() == 2);
  CHECK_FALSE(neg0.mean_ratio_to_true.has_value());
  CHECK(report.failed_cells() >= 2);
  for (const auto& c : report.cells)
    if (!c.ok) CHECK_FALSE(c.error.empty());
  CHECK(report.summary("purple", 1).mean_ratio_to_true.has_value());
  CHECK(count_lines(results_csv(report)) == 1 + report.cells.size() - report.failed_cells());
  auto j = nlohmann::json::parse(report_json(report));
  CHECK(j["version"] == std::string(kVersion));
  CHECK(j["results"].size() == report.cells.size());
  CHECK(j["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("reports do not depend on the number of workers") {
  auto s = tiny_label_frequency();
  s.sweep = {{0.3, ""}, {0.7, ""}};
  s.methods = {"purple", "negative", "em", "supervised"};
  auto one = run_suite(s, 1), four = run_suite(s, 4);
  CHECK(report_json(one) == report_json(four));
  CHECK(results_csv(one) == results_csv(four));
  CHECK(one.failed_cells() == 0);
}
