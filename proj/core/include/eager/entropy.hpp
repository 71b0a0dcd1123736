#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Top-K token entropy and peak-entropy statistics.
 *
 * The uncertainty signal that drives branching: the Shannon entropy (nats)
 * of the K most probable next tokens after renormalizing them to sum to 1.
 * Peak statistics summarize a sequence's entropy trace by the mean of the
 * values at or above a nearest-rank percentile cutoff.
 *
 * Conventions, fixed once for the whole project:
 *  - natural logarithm everywhere (entropies and thresholds are in nats);
 *  - 0 * log 0 := 0;
 *  - percentile = nearest rank, i.e. the ceil(p/100 * n)-th order statistic.
 */

#include <vector>

#include "eager/distribution.hpp"

namespace eager {

/// One entropy observation per generation step; step indices strictly increase.
struct EntropyObservation {
  int step = 0;        // generated-token index, 0-based
  double entropy = 0;  // nats

  friend bool operator==(const EntropyObservation&,
                         const EntropyObservation&) = default;
};

using EntropyTrace = std::vector<EntropyObservation>;

struct PeakStats {
  double percentile = 0;       // the requested percentile, in (0, 100]
  double threshold_value = 0;  // nearest-rank cutoff
  double peak_mean = 0;        // mean entropy over the peak set
  int peak_count = 0;          // |{steps with entropy >= threshold}|
};

/**
 * Keeps the K most probable entries and renormalizes them to sum to 1.
 * If the distribution has fewer than K entries, all of them are kept.
 * Ordering is preserved.
 *
 * Throws InvalidInputError for an empty distribution or K < 1, and
 * DegenerateDistributionError when the retained entries carry no mass.
 */
TokenDistribution renormalize_top_k(const TokenDistribution& dist, int k);

/**
 * Top-K token entropy in nats: -sum p log p over the renormalized top-K
 * entries. Always in [0, ln(min(K, entries))].
 */
double top_k_entropy(const TokenDistribution& dist, int k);

/**
 * Peak-entropy statistics of a trace at a percentile in (0, 100].
 *
 * threshold_value is the nearest-rank percentile of the entropy values;
 * the peak set is every step with entropy >= threshold_value; peak_mean
 * averages over that set. Throws InvalidInputError on an empty trace or
 * an out-of-range percentile.
 */
PeakStats peak_entropy_mean(const EntropyTrace& trace, double percentile);

}  // namespace eager
