#include "purple/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "purple/math.hpp"
#include "purple/rng.hpp"

namespace purple {

GaussSynthConfig GaussSynthConfig::with_dims(std::size_t dims) {
  GaussSynthConfig cfg;
  cfg.n_dims = dims;
  cfg.mean_a.assign(dims, -1.0);
  cfg.mean_b.assign(dims, 1.0);
  cfg.hyperplane.assign(dims, 1.0);
  return cfg;
}

void GaussSynthConfig::validate() const {
  if (n_dims == 0) throw DatasetError("gauss: n_dims must be positive");
  if (mean_a.size() != n_dims || mean_b.size() != n_dims || hyperplane.size() != n_dims)
    throw DatasetError("gauss: means and hyperplane must have n_dims entries");
  if (!(variance > 0.0)) throw DatasetError("gauss: variance must be positive");
  if (n_a == 0 || n_b == 0) throw DatasetError("gauss: both groups need rows");
  for (const char* g : {"a", "b"}) {
    auto it = c.find(g);
    if (it == c.end()) throw DatasetError(std::string("gauss: missing labeling frequency for group ") + g);
    if (!(it->second >= 0.0 && it->second <= 1.0)) throw DatasetError("gauss: labeling frequencies must lie in [0,1]");
  }
  if (!(std::abs(violation_delta) < 1.0)) throw DatasetError("gauss: |violation_delta| must be < 1");
  double norm = 0.0;
  for (double w : hyperplane) norm += w * w;
  if (norm == 0.0) throw DatasetError("gauss: hyperplane must be nonzero");
}

namespace {

LabeledDataset draw(const GaussSynthConfig& cfg, double delta, std::uint64_t seed) {
  const std::size_t d = cfg.n_dims;
  const std::size_t n = cfg.n_a + cfg.n_b;
  const double sd = std::sqrt(cfg.variance);
  double norm = 0.0;
  for (double w : cfg.hyperplane) norm += w * w;
  norm = std::sqrt(norm);

  Engine x_rng = stream(seed, "x");
  Engine y_rng = stream(seed, "y");
  Engine s_rng = stream(seed, "s");
  std::normal_distribution<double> normal(0.0, 1.0);

  LabeledDataset data;
  data.group_names = {"a", "b"};
  data.group.resize(n);
  data.s.resize(n);
  data.y.resize(n);
  std::vector<double> values(n * d);
  std::vector<double> latent(n);
  const double c_a = cfg.c.at("a");
  const double c_b = cfg.c.at("b");

  for (std::size_t i = 0; i < n; ++i) {
    const GroupId g = i < cfg.n_a ? 0 : 1;
    const auto& mean = g == 0 ? cfg.mean_a : cfg.mean_b;
    double proj = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double v = mean[j] + sd * normal(x_rng);
      values[i * d + j] = v;
      proj += v * cfg.hyperplane[j];
    }
    double p = sigmoid(proj / norm);
    if (delta != 0.0) p = std::clamp(p + (g == 0 ? 0.5 : -0.5) * delta, 0.0, 1.0);
    latent[i] = p;
    const bool y = uniform01(y_rng) < p;
    const bool s = uniform01(s_rng) < (g == 0 ? c_a : c_b) * (y ? 1.0 : 0.0);
    data.group[i] = g;
    data.y[i] = y ? 1 : 0;
    data.s[i] = s ? 1 : 0;
  }
  data.features = FeatureMatrix::dense(n, d, std::move(values));
  data.latent_p = std::move(latent);
  if (cfg.separable) return make_separable(data, cfg.c, seed);
  return data;
}

}  // namespace

LabeledDataset generate_gauss(const GaussSynthConfig& config, std::uint64_t seed) {
  config.validate();
  return draw(config, config.violation_delta, seed);
}

LabeledDataset make_separable(const LabeledDataset& data, const LabelingFrequencies& c, std::uint64_t seed) {
  if (!data.latent_p) throw DatasetError("make_separable: latent_p is required");
  const auto& p = *data.latent_p;
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return std::abs(p[i] - 0.5) < std::abs(p[j] - 0.5); });
  const auto n_drop = static_cast<std::size_t>(std::floor(0.4 * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> keep(order.begin() + static_cast<std::ptrdiff_t>(n_drop), order.end());
  std::sort(keep.begin(), keep.end());

  // Per-row uniforms of the original s stream, so survivors keep their draw.
  Engine s_rng = stream(seed, "s");
  std::vector<double> u(n);
  for (auto& v : u) v = uniform01(s_rng);

  std::vector<double> freq(data.n_groups(), 0.0);
  for (std::size_t g = 0; g < data.n_groups(); ++g) {
    auto it = c.find(data.group_names[g]);
    if (it == c.end()) throw DatasetError("make_separable: no labeling frequency for group " + data.group_names[g]);
    freq[g] = it->second;
  }

  LabeledDataset out = data.subset(keep);
  out.y.assign(keep.size(), 0);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::size_t i = keep[k];
    const double hard = p[i] > 0.5 ? 1.0 : 0.0;
    (*out.latent_p)[k] = hard;
    out.y[k] = static_cast<std::int8_t>(hard);
    out.s[k] = u[i] < freq[data.group[i]] * hard ? 1 : 0;
  }
  return out;
}

GaussSynthConfig shift_sweep_config(double v) {
  GaussSynthConfig cfg;
  cfg.mean_b.assign(cfg.n_dims, v);
  return cfg;
}

LabeledDataset generate_violation(const GaussSynthConfig& config, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0)) throw DatasetError("generate_violation: delta must be >= 0");
  GaussSynthConfig base = config;
  base.violation_delta = 0.0;
  base.validate();
  return draw(base, delta, seed);
}

}  // namespace purple
