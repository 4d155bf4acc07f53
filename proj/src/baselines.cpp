#include "purple/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "purple/math.hpp"
#include "purple/rng.hpp"

namespace purple {

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::negative: return "negative";
    case EstimatorKind::supervised: return "supervised";
    case EstimatorKind::em: return "em";
    case EstimatorKind::purple: return "purple";
    case EstimatorKind::external: return "external";
  }
  return "unknown";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  for (auto k : {EstimatorKind::negative, EstimatorKind::supervised, EstimatorKind::em, EstimatorKind::purple,
                 EstimatorKind::external})
    if (to_string(k) == name) return k;
  throw EstimatorError("unknown estimator '" + std::string(name) + "'");
}

double EstimatorOutput::alpha(std::string_view group) const {
  for (const auto& g : groups)
    if (g.group == group) return g.alpha_hat;
  throw EstimatorError("no estimate for group '" + std::string(group) + "'");
}

TrainConfig default_logistic_config() {
  TrainConfig c;
  c.lambda_grid = {0.0};
  return c;
}

namespace {

bool single_class(std::span<const std::uint8_t> labels) {
  return std::all_of(labels.begin(), labels.end(), [&](auto v) { return v == labels.front(); });
}

LogisticFit fit_logistic(const LabeledDataset& train_set, const LabeledDataset& val_set,
                         std::span<const std::uint8_t> train_labels, std::span<const std::uint8_t> val_labels,
                         const TrainConfig& config, std::uint64_t seed) {
  if (train_labels.empty() || val_labels.empty()) throw EstimatorError("logistic fit needs training and validation rows");
  if (single_class(train_labels)) throw EstimatorError("training labels are single-class; logistic fit is undefined");
  auto tt = as_targets(train_labels);
  auto vt = as_targets(val_labels);
  Problem tr{&train_set.features, train_set.group, tt, 0, false};
  Problem va{&val_set.features, val_set.group, vt, 0, false};
  auto grid = train_grid(Params::zeros(train_set.n_dims(), 0), tr, va, val_labels, config, seed);
  return {grid.best.params.to_scorer(), grid.best.epochs_run, grid.best.best_val_loss};
}

std::vector<std::uint8_t> known_y(const LabeledDataset& d, const char* which) {
  if (!d.has_true_labels())
    throw EstimatorError(std::string("supervised fit needs y on every ") + which +
                         " row; it cannot be applied to real positive-unlabeled data");
  return {d.y.begin(), d.y.end()};
}

}  // namespace

LogisticFit fit_negative(const LabeledDataset& train_set, const LabeledDataset& val_set, const TrainConfig& config,
                         std::uint64_t seed) {
  return fit_logistic(train_set, val_set, train_set.s, val_set.s, config, seed);
}

LogisticFit fit_supervised(const LabeledDataset& train_set, const LabeledDataset& val_set, const TrainConfig& config,
                           std::uint64_t seed) {
  auto ty = known_y(train_set, "training");
  auto vy = known_y(val_set, "validation");
  return fit_logistic(train_set, val_set, ty, vy, config, seed);
}

// ---------------------------------------------------------------------------
// EM

std::vector<double> em_e_step(std::span<const double> f, std::span<const std::uint8_t> s, double c) {
  std::vector<double> q(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (s[i]) {
      q[i] = 1.0;
      continue;
    }
    const double denom = 1.0 - c * f[i];
    q[i] = denom > 0.0 ? std::clamp(f[i] * (1.0 - c) / denom, 0.0, 1.0) : 1.0;
  }
  return q;
}

double em_update_c(std::span<const double> f, std::span<const std::uint8_t> s) {
  const double sum_s = std::accumulate(s.begin(), s.end(), 0.0, [](double a, std::uint8_t v) { return a + v; });
  const double sum_f = std::accumulate(f.begin(), f.end(), 0.0);
  if (!(sum_f > 0.0)) return 1.0;
  return std::min(1.0, sum_s / sum_f);
}

double em_initial_c(std::span<const double> g, std::span<const std::uint8_t> s) {
  if (g.size() != s.size()) throw EstimatorError("em_initial_c: score and label lengths differ");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i]) {
      sum += g[i];
      ++n;
    }
  if (n == 0) throw EstimatorError("em_initial_c: no s=1 rows");
  return std::clamp(sum / static_cast<double>(n), 1e-3, 1.0);
}

EmFit fit_em(const LabeledDataset& train_set, const LabeledDataset& val_set, const EmConfig& config, std::uint64_t seed) {
  if (train_set.size() == 0 || val_set.size() == 0) throw EstimatorError("EM needs training and validation rows");
  if (std::none_of(train_set.s.begin(), train_set.s.end(), [](auto v) { return v != 0; }))
    throw EstimatorError("EM needs at least one s=1 training row");

  // Start from the nontraditional classifier g(x) ~ p(s=1|x): c is its mean
  // over held-out labeled rows, f = min(1, g/c).
  auto start = fit_negative(train_set, val_set, config.m_step, derive_seed(seed, {0}));
  const bool val_has_positive = std::any_of(val_set.s.begin(), val_set.s.end(), [](auto v) { return v != 0; });
  const auto& held_out = val_has_positive ? val_set : train_set;
  EmFit out;
  out.initial_c = em_initial_c(start.scorer.scores(held_out.features), held_out.s);
  double c = out.initial_c;
  Params params = Params::zeros(train_set.n_dims(), 0);
  std::copy(start.scorer.weights.begin(), start.scorer.weights.end(), params.values.begin());
  params.values[params.n_dims] = start.scorer.bias;

  std::vector<double> dummy_targets;
  Problem tr{&train_set.features, train_set.group, dummy_targets, 0, false};
  Problem va{&val_set.features, val_set.group, dummy_targets, 0, false};
  auto scores = [&](const LabeledDataset& d) { return params.to_scorer().scores(d.features); };
  auto f_train = scores(train_set);
  auto f_val = scores(val_set);
  for (auto& v : f_train) v = std::min(1.0, v / c);
  for (auto& v : f_val) v = std::min(1.0, v / c);

  out.c_trace.push_back(c);
  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    auto q_train = em_e_step(f_train, train_set.s, c);
    auto q_val = em_e_step(f_val, val_set.s, c);
    tr.target = q_train;
    va.target = q_val;
    auto outcome = train(params, tr, va, 0.0, config.m_step, derive_seed(seed, {it}));
    params = std::move(outcome.params);
    f_train = scores(train_set);
    f_val = scores(val_set);
    const double c_new = em_update_c(f_train, train_set.s);
    out.c_trace.push_back(c_new);
    out.iterations = it;
    const bool done = std::abs(c_new - c) < config.tol;
    c = c_new;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.c_hat = c;
  out.scorer = params.to_scorer();
  return out;
}

// ---------------------------------------------------------------------------
// Estimators

namespace {

double mean_over_group(const LinearScorer& scorer, const LabeledDataset& eval_set, GroupId g) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < eval_set.size(); ++i)
    if (eval_set.group[i] == g) {
      sum += scorer.score(eval_set.features, i);
      ++n;
    }
  if (n == 0) throw EstimatorError("group '" + eval_set.group_names[g] + "' has no evaluation rows");
  return sum / static_cast<double>(n);
}

class PurpleEstimator final : public Estimator {
 public:
  explicit PurpleEstimator(TrainConfig config) : config_(std::move(config)) {}
  EstimatorKind kind() const override { return EstimatorKind::purple; }
  std::string name() const override { return "purple"; }

  EstimatorOutput estimate(const LabeledDataset& train_set, const LabeledDataset& val_set, const LabeledDataset& eval_set,
                           std::uint64_t seed) const override {
    auto result = fit(train_set, val_set, config_, seed);
    if (result.model.degenerate) throw EstimatorError("purple: training data has no positive labels");
    EstimatorOutput out;
    for (std::size_t g = 0; g < eval_set.n_groups(); ++g)
      out.groups.push_back(
          {eval_set.group_names[g], mean_over_group(result.model.scorer, eval_set, static_cast<GroupId>(g))});
    out.notes = std::move(result.warnings);
    return out;
  }

 private:
  TrainConfig config_;
};

/// Fits a scorer on each group's rows separately.
class PerGroupEstimator : public Estimator {
 public:
  EstimatorOutput estimate(const LabeledDataset& train_set, const LabeledDataset& val_set, const LabeledDataset& eval_set,
                           std::uint64_t seed) const override {
    EstimatorOutput out;
    for (std::size_t g = 0; g < eval_set.n_groups(); ++g) {
      const auto gid = static_cast<GroupId>(g);
      const auto& gname = eval_set.group_names[g];
      try {
        auto tr = train_set.group_subset(train_set.group_id(gname));
        auto va = val_set.group_subset(val_set.group_id(gname));
        auto fitted = fit_group(tr, va, derive_seed(seed, {g}), out);
        out.groups.push_back({gname, mean_over_group(fitted, eval_set, gid)});
      } catch (const std::exception& e) {
        throw EstimatorError(name() + " failed on group '" + gname + "': " + e.what());
      }
    }
    return out;
  }

 protected:
  virtual LinearScorer fit_group(const LabeledDataset& tr, const LabeledDataset& va, std::uint64_t seed,
                                 EstimatorOutput& out) const = 0;
};

class NegativeEstimator final : public PerGroupEstimator {
 public:
  explicit NegativeEstimator(TrainConfig c) : config_(std::move(c)) {}
  EstimatorKind kind() const override { return EstimatorKind::negative; }
  std::string name() const override { return "negative"; }

 protected:
  LinearScorer fit_group(const LabeledDataset& tr, const LabeledDataset& va, std::uint64_t seed,
                         EstimatorOutput&) const override {
    return fit_negative(tr, va, config_, seed).scorer;
  }

 private:
  TrainConfig config_;
};

class SupervisedEstimator final : public PerGroupEstimator {
 public:
  explicit SupervisedEstimator(TrainConfig c) : config_(std::move(c)) {}
  EstimatorKind kind() const override { return EstimatorKind::supervised; }
  std::string name() const override { return "supervised"; }

 protected:
  LinearScorer fit_group(const LabeledDataset& tr, const LabeledDataset& va, std::uint64_t seed,
                         EstimatorOutput&) const override {
    return fit_supervised(tr, va, config_, seed).scorer;
  }

 private:
  TrainConfig config_;
};

class EmEstimator final : public PerGroupEstimator {
 public:
  explicit EmEstimator(EmConfig c) : config_(std::move(c)) {}
  EstimatorKind kind() const override { return EstimatorKind::em; }
  std::string name() const override { return "em"; }

 protected:
  LinearScorer fit_group(const LabeledDataset& tr, const LabeledDataset& va, std::uint64_t seed,
                         EstimatorOutput& out) const override {
    auto em = fit_em(tr, va, config_, seed);
    const auto& g = tr.group_names[tr.group.front()];
    out.notes.push_back("em group '" + g + "': initial c=" + std::to_string(em.initial_c) +
                        " final c=" + std::to_string(em.c_hat) + " iterations=" + std::to_string(em.iterations));
    if (!em.converged) {
      out.converged = false;
      out.notes.push_back("em group '" + g + "' did not converge");
    }
    return em.scorer;
  }

 private:
  EmConfig config_;
};

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, EstimatorFactory>& registry() {
  static std::map<std::string, EstimatorFactory> r;
  return r;
}

}  // namespace

void register_external_estimator(const std::string& name, EstimatorFactory factory) {
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(factory);
}

bool has_external_estimator(const std::string& name) {
  std::lock_guard lock(registry_mutex());
  return registry().count(name) > 0;
}

std::unique_ptr<Estimator> make_estimator(EstimatorKind kind, const EstimatorConfig& config, const std::string& name) {
  switch (kind) {
    case EstimatorKind::purple: return std::make_unique<PurpleEstimator>(config.purple);
    case EstimatorKind::negative: return std::make_unique<NegativeEstimator>(config.logistic);
    case EstimatorKind::supervised: return std::make_unique<SupervisedEstimator>(config.logistic);
    case EstimatorKind::em: return std::make_unique<EmEstimator>(config.em);
    case EstimatorKind::external: {
      EstimatorFactory factory;
      {
        std::lock_guard lock(registry_mutex());
        auto it = registry().find(name);
        if (it == registry().end()) throw EstimatorError("no external estimator registered as '" + name + "'");
        factory = it->second;
      }
      return factory(config);
    }
  }
  throw EstimatorError("unhandled estimator kind");
}

std::unique_ptr<Estimator> make_estimator(const std::string& name, const EstimatorConfig& config) {
  if (has_external_estimator(name)) return make_estimator(EstimatorKind::external, config, name);
  auto kind = parse_estimator_kind(name);
  if (kind == EstimatorKind::external) throw EstimatorError("'external' needs a registered plug-in name");
  return make_estimator(kind, config);
}

RelativePrevalenceEstimate baseline_relative_prevalence(const Estimator& estimator, const LabeledDataset& train_set,
                                                        const LabeledDataset& val_set, const LabeledDataset& eval_set,
                                                        const std::string& group_a, const std::string& group_b,
                                                        std::uint64_t seed) {
  for (const auto* d : {&train_set, &val_set, &eval_set})
    for (const auto& g : {group_a, group_b})
      if (!d->find_group(g) || d->count_group(d->group_id(g)) == 0)
        throw EstimatorError("group '" + g + "' is missing from an input dataset");
  auto out = estimator.estimate(train_set, val_set, eval_set, seed);
  const double a = out.alpha(group_a);
  const double b = out.alpha(group_b);
  RelativePrevalenceEstimate e;
  try {
    e = RelativePrevalenceEstimate::from_splits(group_a, group_b, {ratio_of_means(a, b)});
  } catch (const DatasetError&) {
    throw EstimatorError(estimator.name() + ": group '" + group_b + "' prevalence estimate is ~0");
  }
  e.converged = out.converged;
  return e;
}

RelativePrevalenceEstimate baseline_relative_prevalence(EstimatorKind kind, const LabeledDataset& train_set,
                                                        const LabeledDataset& val_set, const LabeledDataset& eval_set,
                                                        const std::string& group_a, const std::string& group_b,
                                                        std::uint64_t seed, const EstimatorConfig& config) {
  auto est = make_estimator(kind, config);
  return baseline_relative_prevalence(*est, train_set, val_set, eval_set, group_a, group_b, seed);
}

}  // namespace purple
