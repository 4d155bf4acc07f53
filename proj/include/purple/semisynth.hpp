#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "purple/dataset.hpp"
#include "purple/synth.hpp"

namespace purple {

/// Feature indices whose presence makes the simulated condition more likely.
struct SymptomSet {
  std::string name;
  std::vector<std::uint32_t> indices;  // sorted, unique

  void validate(std::size_t n_dims) const;
};

/// Newline-separated feature indices; blank lines and `#` comments ignored.
SymptomSet load_symptom_set(const std::string& path, std::string name = "file");
void write_symptom_set(const SymptomSet& set, const std::string& path);

/// One-hot visit matrix with group membership and no labels.
struct VisitCorpus {
  FeatureMatrix visits;
  std::vector<GroupId> group;
  std::vector<std::string> group_names;

  static VisitCorpus from_dataset(const LabeledDataset& data);
  LabeledDataset to_dataset() const;
};

struct SemiSynthConfig {
  LabelingFrequencies c;
  std::uint64_t seed = 0;
};

/// latent_p = sigmoid(k / sqrt(|v_sym|)) where k counts the row's active
/// suspicious symptoms; y ~ Bernoulli(latent_p), s ~ Bernoulli(c_g * y).
LabeledDataset simulate_labels(const FeatureMatrix& visits, std::span<const GroupId> groups,
                               const std::vector<std::string>& group_names, const SymptomSet& v_sym,
                               const SemiSynthConfig& cfg);
LabeledDataset simulate_labels(const VisitCorpus& corpus, const SymptomSet& v_sym, const SemiSynthConfig& cfg);

/// Ranks features by occurrence count (descending, ties by index) and samples
/// `pick` of the top `pool` uniformly.
SymptomSet select_common_symptoms(const FeatureMatrix& visits, std::size_t pool = 50, std::size_t pick = 25,
                                  std::uint64_t seed = 0);

/// Top features by (rate in group_num) / (rate in group_den) among features
/// appearing at least `min_count` times in each group.
SymptomSet select_high_rp_symptoms(const FeatureMatrix& visits, std::span<const GroupId> groups, GroupId group_num,
                                   GroupId group_den, std::size_t min_count = 50, std::size_t top = 10);

/// Top features by (rate among rows with any anchor feature) / (overall
/// rate), anchors excluded. Callers should drop the anchor columns from the
/// features used for estimation.
SymptomSet select_correlated_symptoms(const FeatureMatrix& visits, const SymptomSet& anchor, std::size_t top = 25);

/// Desk-scale stand-in for a hospital visit matrix: Zipf-distributed code
/// frequencies, group-dependent code rates, and latent co-occurrence topics
/// that give the correlated-symptom mode something to find.
struct CorpusConfig {
  std::size_t n_dims = 1000;
  std::size_t n_a = 8000;
  std::size_t n_b = 16000;
  double zipf_exponent = 1.0;
  double mean_codes_per_visit = 6.0;
  double max_code_rate = 0.5;
  /// Std-dev of group a's log rate multiplier per code (group b is the reference).
  double group_log_rate_sd = 0.5;
  std::size_t n_topics = 12;
  std::size_t topic_size = 30;
  double topic_prevalence = 0.06;
  double topic_code_rate = 0.35;
};

struct SyntheticCorpus {
  VisitCorpus corpus;
  /// Codes of topic 0 that play the role of gold-standard diagnosis codes.
  SymptomSet anchors;
  /// Fixed 100-code list standing in for literature-derived symptoms.
  SymptomSet recognized;
};

SyntheticCorpus generate_visit_corpus(const CorpusConfig& config, std::uint64_t seed);

}  // namespace purple
