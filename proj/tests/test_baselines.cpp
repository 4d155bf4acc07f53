#include <doctest.h>

#include <numeric>

#include "purple/baselines.hpp"
#include "purple/harness.hpp"
#include "purple/synth.hpp"
#include "support.hpp"

using namespace purple;

namespace {

DataSplit gauss_split(std::uint64_t seed, std::map<std::string, double> c = {{"a", 0.5}, {"b", 0.25}}) {
  GaussSynthConfig cfg;
  cfg.c = std::move(c);
  auto data = generate_gauss(cfg, seed);
  SplitSpec spec;
  spec.seed = seed;
  return split(data, spec, 0);
}

double mean_s(const LabeledDataset& d, GroupId g) {
  double sum = 0, n = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.group[i] == g) {
      sum += d.s[i];
      n += 1;
    }
  return sum / n;
}

class ConstantEstimator final : public Estimator {
 public:
  explicit ConstantEstimator(double a) : a_(a) {}
  EstimatorKind kind() const override { return EstimatorKind::external; }
  std::string name() const override { return "constant"; }
  EstimatorOutput estimate(const LabeledDataset&, const LabeledDataset&, const LabeledDataset& eval,
                           std::uint64_t) const override {
    EstimatorOutput out;
    for (const auto& g : eval.group_names) out.groups.push_back({g, g == "a" ? a_ : 0.1});
    return out;
  }

 private:
  double a_;
};

}  // namespace

TEST_CASE("negative baseline is biased by c_a / c_b") {
  auto parts = gauss_split(1);
  auto rp = baseline_relative_prevalence(EstimatorKind::negative, parts.train, parts.val, parts.test, "a", "b", 1);
  const double truth = true_relative_prevalence(parts.test, "a", "b");
  CHECK(rp.value / truth == doctest::Approx(2.0).epsilon(0.1));
  // The logistic fit with an intercept reproduces the observed label rates.
  CHECK(rp.value == doctest::Approx(mean_s(parts.test, 0) / mean_s(parts.test, 1)).epsilon(0.1));

  auto equal = gauss_split(2, {{"a", 0.4}, {"b", 0.4}});
  auto rp_eq = baseline_relative_prevalence(EstimatorKind::negative, equal.train, equal.val, equal.test, "a", "b", 2);
  CHECK(rp_eq.value / true_relative_prevalence(equal.test, "a", "b") == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("supervised baseline recovers the truth") {
  auto parts = gauss_split(3);
  auto rp = baseline_relative_prevalence(EstimatorKind::supervised, parts.train, parts.val, parts.test, "a", "b", 3);
  CHECK(rp.value / true_relative_prevalence(parts.test, "a", "b") == doctest::Approx(1.0).epsilon(0.05));

  auto fitted = fit_supervised(parts.train, parts.val, default_logistic_config(), 3);
  auto scores = fitted.scorer.scores(parts.train.features);
  const double mean_pred = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  double mean_y = 0;
  for (auto y : parts.train.y) mean_y += y;
  mean_y /= static_cast<double>(parts.train.size());
  CHECK(std::abs(mean_pred - mean_y) < 0.01);
}

TEST_CASE("negative equals supervised when every positive is labeled") {
  auto parts = gauss_split(4, {{"a", 1.0}, {"b", 1.0}});
  auto neg = baseline_relative_prevalence(EstimatorKind::negative, parts.train, parts.val, parts.test, "a", "b", 4);
  auto sup = baseline_relative_prevalence(EstimatorKind::supervised, parts.train, parts.val, parts.test, "a", "b", 4);
  CHECK(neg.value == sup.value);
}

TEST_CASE("supervised fit refuses unknown labels") {
  auto parts = gauss_split(5);
  parts.train.y.clear();
  CHECK_THROWS_AS(fit_supervised(parts.train, parts.val, default_logistic_config(), 0), EstimatorError);
}

TEST_CASE("EM steps by hand") {
  std::vector<double> f = {0.5, 0.8, 0.2};
  std::vector<std::uint8_t> s = {1, 0, 0};
  auto q = em_e_step(f, s, 0.5);
  CHECK(q[0] == 1.0);
  CHECK(q[1] == doctest::Approx(0.8 * 0.5 / (1 - 0.4)).epsilon(1e-15));
  CHECK(q[2] == doctest::Approx(0.2 * 0.5 / (1 - 0.1)).epsilon(1e-15));
  CHECK(em_update_c(f, s) == doctest::Approx(1.0 / 1.5).epsilon(1e-15));
  // c = 1 means unlabeled rows are negatives.
  auto q1 = em_e_step(f, s, 1.0);
  CHECK(q1[1] == 0.0);
  CHECK(q1[2] == 0.0);
  CHECK(em_update_c(std::vector<double>{0.1, 0.1}, std::vector<std::uint8_t>{1, 1}) == 1.0);
  CHECK(em_initial_c(std::vector<double>{0.2, 0.6, 0.9}, std::vector<std::uint8_t>{1, 1, 0}) ==
        doctest::Approx(0.4).epsilon(1e-15));
  CHECK(em_initial_c(std::vector<double>{0.0}, std::vector<std::uint8_t>{1}) == 1e-3);
  CHECK_THROWS_AS(em_initial_c(std::vector<double>{0.3}, std::vector<std::uint8_t>{0}), EstimatorError);
}

TEST_CASE("EM approaches c = 1 when labels are complete") {
  auto parts = gauss_split(6, {{"a", 1.0}, {"b", 1.0}});
  auto tr = parts.train.group_subset(1), va = parts.val.group_subset(1);
  auto em = fit_em(tr, va, EmConfig{}, 6);
  CHECK(em.c_hat > 0.9);
  CHECK(em.c_trace.size() == em.iterations + 1);
}

TEST_CASE("EM reports non-convergence") {
  auto parts = gauss_split(7);
  auto tr = parts.train.group_subset(0), va = parts.val.group_subset(0);
  EmConfig cfg;
  cfg.max_iters = 1;
  cfg.tol = 0.0;
  auto em = fit_em(tr, va, cfg, 7);
  CHECK_FALSE(em.converged);
  CHECK(em.iterations == 1);

  EstimatorConfig est;
  est.em = cfg;
  auto rp = baseline_relative_prevalence(EstimatorKind::em, parts.train, parts.val, parts.test, "a", "b", 7, est);
  CHECK_FALSE(rp.converged);
}

TEST_CASE("estimator registry and error messages") {
  CHECK_THROWS_AS(make_estimator("kmeans-nope", EstimatorConfig{}), EstimatorError);
  CHECK_THROWS_AS(make_estimator("external", EstimatorConfig{}), EstimatorError);
  register_external_estimator("constant", [](const EstimatorConfig&) { return std::make_unique<ConstantEstimator>(0.3); });
  CHECK(has_external_estimator("constant"));
  auto est = make_estimator("constant", EstimatorConfig{});
  auto parts = gauss_split(8);
  auto rp = baseline_relative_prevalence(*est, parts.train, parts.val, parts.test, "a", "b", 0);
  CHECK(rp.value == doctest::Approx(3.0).epsilon(1e-12));

  for (auto k : {"purple", "negative", "em", "supervised"}) CHECK(make_estimator(k, EstimatorConfig{})->name() == k);

  // No s=1 rows in group b: the failure names the group.
  auto no_b = parts;
  for (auto* d : {&no_b.train, &no_b.val})
    for (std::size_t i = 0; i < d->size(); ++i)
      if (d->group[i] == 1) d->s[i] = 0;
  try {
    baseline_relative_prevalence(EstimatorKind::negative, no_b.train, no_b.val, no_b.test, "a", "b", 0);
    FAIL("expected an error");
  } catch (const EstimatorError& e) {
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
  CHECK_THROWS_AS(
      baseline_relative_prevalence(EstimatorKind::negative, parts.train, parts.val, parts.test, "a", "zzz", 0),
      EstimatorError);
}
