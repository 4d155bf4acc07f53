#include "purple/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace purple {

namespace {

void check_lengths(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw MetricError("scores and labels differ in length");
}

}  // namespace

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });

  // Sum of midranks of the positives.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]]) {
        rank_sum += midrank;
        ++n_pos;
      }
    i = j + 1;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw MetricError("auc needs at least one positive and one negative label");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double auprc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return scores[i] > scores[j]; });
  const auto n_pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; }));
  if (n_pos == 0) throw MetricError("auprc needs at least one positive label");
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!labels[order[rank]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  return sum / static_cast<double>(n_pos);
}

Calibration calibration(std::span<const double> preds, std::span<const std::uint8_t> labels, std::size_t n_bins) {
  check_lengths(preds, labels);
  if (n_bins == 0) throw MetricError("calibration needs at least one bin");
  Calibration out;
  out.bins.resize(n_bins);
  std::vector<double> pred_sum(n_bins, 0.0), label_sum(n_bins, 0.0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = preds[i];
    if (!(p >= 0.0 && p <= 1.0)) throw MetricError("calibration predictions must lie in [0,1]");
    auto b = static_cast<std::size_t>(p * static_cast<double>(n_bins));
    if (b >= n_bins) b = n_bins - 1;
    pred_sum[b] += p;
    label_sum[b] += labels[i] ? 1.0 : 0.0;
    ++out.bins[b].count;
  }
  const double n = static_cast<double>(preds.size());
  for (std::size_t b = 0; b < n_bins; ++b) {
    auto& bin = out.bins[b];
    bin.lower = static_cast<double>(b) / static_cast<double>(n_bins);
    bin.upper = static_cast<double>(b + 1) / static_cast<double>(n_bins);
    if (bin.count == 0) continue;
    const double c = static_cast<double>(bin.count);
    bin.mean_predicted = pred_sum[b] / c;
    bin.empirical_rate = label_sum[b] / c;
    out.ece += (c / n) * std::abs(bin.mean_predicted - bin.empirical_rate);
  }
  return out;
}

}  // namespace purple
