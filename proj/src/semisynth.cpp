#include "purple/semisynth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "purple/math.hpp"
#include "purple/rng.hpp"

namespace purple {

void SymptomSet::validate(std::size_t n_dims) const {
  if (indices.empty()) throw DatasetError("symptom set '" + name + "' is empty");
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= n_dims) throw DatasetError("symptom set '" + name + "': index out of range");
    if (k > 0 && indices[k - 1] >= indices[k]) throw DatasetError("symptom set '" + name + "': indices must be sorted and unique");
  }
}

SymptomSet load_symptom_set(const std::string& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path);
  std::set<std::uint32_t> idx;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      unsigned long v = std::stoul(line, &used);
      if (used != line.size()) throw std::invalid_argument("trailing text");
      idx.insert(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw ParseError(line_no, "not a feature index: '" + line + "'");
    }
  }
  return {std::move(name), {idx.begin(), idx.end()}};
}

void write_symptom_set(const SymptomSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write " + path);
  for (auto i : set.indices) out << i << '\n';
}

VisitCorpus VisitCorpus::from_dataset(const LabeledDataset& data) {
  return {data.features, data.group, data.group_names};
}

LabeledDataset VisitCorpus::to_dataset() const {
  LabeledDataset d;
  d.features = visits;
  d.group = group;
  d.group_names = group_names;
  d.s.assign(group.size(), 0);
  return d;
}

LabeledDataset simulate_labels(const FeatureMatrix& visits, std::span<const GroupId> groups,
                               const std::vector<std::string>& group_names, const SymptomSet& v_sym,
                               const SemiSynthConfig& cfg) {
  v_sym.validate(visits.n_dims());
  if (groups.size() != visits.n_rows()) throw DatasetError("simulate_labels: group column length mismatch");
  std::vector<bool> suspicious(visits.n_dims(), false);
  for (auto j : v_sym.indices) suspicious[j] = true;
  std::vector<double> freq(group_names.size());
  for (std::size_t g = 0; g < group_names.size(); ++g) {
    auto it = cfg.c.find(group_names[g]);
    if (it == cfg.c.end()) throw DatasetError("simulate_labels: no labeling frequency for group " + group_names[g]);
    if (!(it->second >= 0.0 && it->second <= 1.0)) throw DatasetError("simulate_labels: labeling frequency outside [0,1]");
    freq[g] = it->second;
  }
  const double norm = std::sqrt(static_cast<double>(v_sym.indices.size()));

  Engine y_rng = stream(cfg.seed, "y");
  Engine s_rng = stream(cfg.seed, "s");
  const std::size_t n = visits.n_rows();
  LabeledDataset data;
  data.features = visits;
  data.group.assign(groups.begin(), groups.end());
  data.group_names = group_names;
  data.s.resize(n);
  data.y.resize(n);
  std::vector<double> latent(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = 0;
    visits.for_each_nonzero(i, [&](std::uint32_t j, double v) {
      if (v != 1.0) throw DatasetError("simulate_labels: row " + std::to_string(i) + " has a non-binary feature value");
      if (suspicious[j]) ++k;
    });
    latent[i] = sigmoid(static_cast<double>(k) / norm);
    const bool y = uniform01(y_rng) < latent[i];
    const bool s = uniform01(s_rng) < freq[groups[i]] * (y ? 1.0 : 0.0);
    data.y[i] = y ? 1 : 0;
    data.s[i] = s ? 1 : 0;
  }
  data.latent_p = std::move(latent);
  return data;
}

LabeledDataset simulate_labels(const VisitCorpus& corpus, const SymptomSet& v_sym, const SemiSynthConfig& cfg) {
  return simulate_labels(corpus.visits, corpus.group, corpus.group_names, v_sym, cfg);
}

namespace {

std::vector<std::size_t> column_counts(const FeatureMatrix& m, std::span<const GroupId> groups, std::optional<GroupId> only) {
  std::vector<std::size_t> counts(m.n_dims(), 0);
  for (std::size_t i = 0; i < m.n_rows(); ++i) {
    if (only && groups[i] != *only) continue;
    m.for_each_nonzero(i, [&](std::uint32_t j, double) { ++counts[j]; });
  }
  return counts;
}

struct Ranked {
  std::uint32_t index;
  double score;
};

std::vector<std::uint32_t> top_indices(std::vector<Ranked> ranked, std::size_t top) {
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  if (ranked.size() > top) ranked.resize(top);
  std::vector<std::uint32_t> out;
  for (const auto& r : ranked) out.push_back(r.index);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

SymptomSet select_common_symptoms(const FeatureMatrix& visits, std::size_t pool, std::size_t pick, std::uint64_t seed) {
  if (pool > visits.n_dims()) throw DatasetError("select_common_symptoms: pool exceeds dimensionality");
  if (pick > pool) throw DatasetError("select_common_symptoms: pick exceeds pool");
  auto counts = column_counts(visits, {}, std::nullopt);
  std::vector<Ranked> ranked;
  for (std::uint32_t j = 0; j < counts.size(); ++j)
    if (counts[j] > 0) ranked.push_back({j, static_cast<double>(counts[j])});
  if (ranked.size() < pool) throw DatasetError("select_common_symptoms: fewer than `pool` features ever occur");
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  std::vector<std::uint32_t> candidates;
  for (std::size_t k = 0; k < pool; ++k) candidates.push_back(ranked[k].index);
  Engine rng = stream(seed, "common-symptoms");
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(pick);
  std::sort(candidates.begin(), candidates.end());
  return {"common", std::move(candidates)};
}

SymptomSet select_high_rp_symptoms(const FeatureMatrix& visits, std::span<const GroupId> groups, GroupId group_num,
                                   GroupId group_den, std::size_t min_count, std::size_t top) {
  const auto n_num = static_cast<std::size_t>(std::count(groups.begin(), groups.end(), group_num));
  const auto n_den = static_cast<std::size_t>(std::count(groups.begin(), groups.end(), group_den));
  if (n_num == 0 || n_den == 0) throw DatasetError("select_high_rp_symptoms: both groups must be present");
  auto num = column_counts(visits, groups, group_num);
  auto den = column_counts(visits, groups, group_den);
  std::vector<Ranked> ranked;
  for (std::uint32_t j = 0; j < num.size(); ++j) {
    if (num[j] < min_count || den[j] < min_count || den[j] == 0) continue;
    const double rate_num = static_cast<double>(num[j]) / static_cast<double>(n_num);
    const double rate_den = static_cast<double>(den[j]) / static_cast<double>(n_den);
    ranked.push_back({j, rate_num / rate_den});
  }
  if (ranked.empty()) throw DatasetError("select_high_rp_symptoms: no feature passes the count filter");
  return {"high-rp", top_indices(std::move(ranked), top)};
}

SymptomSet select_correlated_symptoms(const FeatureMatrix& visits, const SymptomSet& anchor, std::size_t top) {
  anchor.validate(visits.n_dims());
  std::vector<bool> is_anchor(visits.n_dims(), false);
  for (auto j : anchor.indices) is_anchor[j] = true;
  std::vector<std::size_t> all(visits.n_dims(), 0), pos(visits.n_dims(), 0);
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < visits.n_rows(); ++i) {
    bool hit = false;
    visits.for_each_nonzero(i, [&](std::uint32_t j, double) {
      ++all[j];
      hit = hit || is_anchor[j];
    });
    if (!hit) continue;
    ++n_pos;
    visits.for_each_nonzero(i, [&](std::uint32_t j, double) { ++pos[j]; });
  }
  if (n_pos == 0) throw DatasetError("select_correlated_symptoms: no row carries an anchor feature");
  const double n = static_cast<double>(visits.n_rows());
  std::vector<Ranked> ranked;
  for (std::uint32_t j = 0; j < all.size(); ++j) {
    if (is_anchor[j] || all[j] == 0) continue;
    const double ratio = (static_cast<double>(pos[j]) / static_cast<double>(n_pos)) / (static_cast<double>(all[j]) / n);
    ranked.push_back({j, ratio});
  }
  if (ranked.empty()) throw DatasetError("select_correlated_symptoms: no candidate features");
  return {"correlated", top_indices(std::move(ranked), top)};
}

SyntheticCorpus generate_visit_corpus(const CorpusConfig& cfg, std::uint64_t seed) {
  const std::size_t d = cfg.n_dims;
  if (d < cfg.n_topics * cfg.topic_size || d < 100) throw DatasetError("generate_visit_corpus: too few dimensions");
  Engine layout = stream(seed, "layout");
  std::normal_distribution<double> normal(0.0, 1.0);

  // Zipf base rates over a random permutation of code ids.
  std::vector<std::uint32_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), layout);
  std::vector<double> base(d);
  double harmonic = 0.0;
  for (std::size_t r = 0; r < d; ++r) harmonic += std::pow(static_cast<double>(r + 1), -cfg.zipf_exponent);
  for (std::size_t r = 0; r < d; ++r)
    base[perm[r]] = std::min(cfg.max_code_rate, cfg.mean_codes_per_visit *
                                                    std::pow(static_cast<double>(r + 1), -cfg.zipf_exponent) / harmonic);
  std::vector<double> rate_a(d), rate_b(d);
  for (std::size_t j = 0; j < d; ++j) {
    rate_b[j] = base[j];
    rate_a[j] = std::min(cfg.max_code_rate, base[j] * std::exp(cfg.group_log_rate_sd * normal(layout)));
  }

  // Topics draw their codes from the mid-frequency range so they are neither
  // ubiquitous nor too rare to rank.
  std::vector<std::uint32_t> mid(perm.begin() + 20, perm.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(d, 600)));
  std::shuffle(mid.begin(), mid.end(), layout);
  std::vector<std::vector<std::uint32_t>> topics(cfg.n_topics);
  for (std::size_t t = 0; t < cfg.n_topics; ++t)
    for (std::size_t k = 0; k < cfg.topic_size; ++k) topics[t].push_back(mid[(t * cfg.topic_size + k) % mid.size()]);
  std::vector<double> topic_prev_a(cfg.n_topics), topic_prev_b(cfg.n_topics);
  for (std::size_t t = 0; t < cfg.n_topics; ++t) {
    topic_prev_b[t] = cfg.topic_prevalence;
    topic_prev_a[t] = std::min(0.5, cfg.topic_prevalence * std::exp(0.5 * normal(layout)));
  }

  Engine rows_rng = stream(seed, "rows");
  const std::size_t n = cfg.n_a + cfg.n_b;
  std::vector<std::vector<SparseEntry>> rows(n);
  std::vector<GroupId> group(n);
  std::vector<bool> active(d);
  for (std::size_t i = 0; i < n; ++i) {
    const GroupId g = i < cfg.n_a ? 0 : 1;
    group[i] = g;
    const auto& rate = g == 0 ? rate_a : rate_b;
    std::fill(active.begin(), active.end(), false);
    for (std::size_t j = 0; j < d; ++j) active[j] = uniform01(rows_rng) < rate[j];
    for (std::size_t t = 0; t < cfg.n_topics; ++t) {
      if (uniform01(rows_rng) >= (g == 0 ? topic_prev_a[t] : topic_prev_b[t])) continue;
      for (auto j : topics[t])
        if (uniform01(rows_rng) < cfg.topic_code_rate) active[j] = true;
    }
    for (std::uint32_t j = 0; j < d; ++j)
      if (active[j]) rows[i].push_back({j, 1.0});
  }

  SyntheticCorpus out;
  out.corpus.visits = FeatureMatrix::sparse(d, rows);
  out.corpus.group = std::move(group);
  out.corpus.group_names = {"a", "b"};

  std::vector<std::uint32_t> anchors(topics[0].begin(), topics[0].begin() + std::min<std::ptrdiff_t>(10, static_cast<std::ptrdiff_t>(topics[0].size())));
  std::sort(anchors.begin(), anchors.end());
  out.anchors = {"anchors", std::move(anchors)};

  Engine pick = stream(seed, "recognized");
  std::vector<std::uint32_t> pool(perm.begin() + 10, perm.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(d, 400)));
  std::shuffle(pool.begin(), pool.end(), pick);
  pool.resize(std::min<std::size_t>(100, pool.size()));
  std::sort(pool.begin(), pool.end());
  out.recognized = {"recognized", std::move(pool)};
  return out;
}

}  // namespace purple
