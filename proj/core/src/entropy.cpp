// SPDX-License-Identifier: Apache-2.0

#include "eager/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "eager/errors.hpp"

namespace eager {

TokenDistribution renormalize_top_k(const TokenDistribution& dist, int k) {
  if (dist.empty()) {
    throw InvalidInputError("renormalize_top_k: empty distribution");
  }
  if (k < 1) {
    throw InvalidInputError("renormalize_top_k: K must be >= 1");
  }
  const auto& entries = dist.entries();
  const size_t keep = std::min(static_cast<size_t>(k), entries.size());

  double mass = 0.0;
  for (size_t i = 0; i < keep; ++i) mass += entries[i].prob;
  if (mass <= 0.0) {
    throw DegenerateDistributionError(
        "renormalize_top_k: zero total mass over top-K entries");
  }

  std::vector<TokenEntry> top(entries.begin(), entries.begin() + keep);
  for (TokenEntry& e : top) e.prob /= mass;
  return TokenDistribution(std::move(top), dist.vocab_size());
}

double top_k_entropy(const TokenDistribution& dist, int k) {
  const TokenDistribution top = renormalize_top_k(dist, k);
  double h = 0.0;
  for (const TokenEntry& e : top.entries()) {
    if (e.prob > 0.0) h -= e.prob * std::log(e.prob);
  }
  return std::max(0.0, h);
}

PeakStats peak_entropy_mean(const EntropyTrace& trace, double percentile) {
  if (trace.empty()) {
    throw InvalidInputError("peak_entropy_mean: empty trace");
  }
  if (!(percentile > 0.0) || percentile > 100.0) {
    throw InvalidInputError("peak_entropy_mean: percentile must be in (0, 100]");
  }

  std::vector<double> values;
  values.reserve(trace.size());
  for (const EntropyObservation& o : trace) values.push_back(o.entropy);
  std::sort(values.begin(), values.end());

  const size_t n = values.size();
  size_t rank = static_cast<size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(n)));
  rank = std::clamp<size_t>(rank, 1, n);
  const double threshold = values[rank - 1];

  double sum = 0.0;
  int count = 0;
  for (const EntropyObservation& o : trace) {
    if (o.entropy >= threshold) {
      sum += o.entropy;
      ++count;
    }
  }

  PeakStats stats;
  stats.percentile = percentile;
  stats.threshold_value = threshold;
  stats.peak_count = count;
  stats.peak_mean = sum / static_cast<double>(count);
  return stats;
}

}  // namespace eager
