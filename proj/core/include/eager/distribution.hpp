#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Next-token probability distributions.
 *
 * A TokenDistribution is the per-step output of every token source: a list
 * of (token id, probability) entries ordered by descending probability with
 * ties broken by ascending token id. A full distribution sums to 1; a
 * truncated one (e.g. the top log-probs reported by a remote endpoint) may
 * sum to less.
 */

#include <cstdint>
#include <span>
#include <vector>

#include "eager/types.hpp"

namespace eager {

struct TokenEntry {
  TokenId token = 0;
  double prob = 0.0;

  friend bool operator==(const TokenEntry&, const TokenEntry&) = default;
};

class TokenDistribution {
 public:
  TokenDistribution() = default;

  /**
   * Builds a distribution from unordered entries.
   *
   * Validates: non-negative probabilities, distinct token ids below
   * vocab_size, total mass <= 1 + 1e-9. Entries are sorted into the
   * canonical order (descending probability, ascending token id on ties).
   * Throws InvalidInputError on violations.
   */
  TokenDistribution(std::vector<TokenEntry> entries, int32_t vocab_size);

  /// Builds a distribution from raw logits; probs = softmax(logits / temperature).
  static TokenDistribution from_logits(std::span<const double> logits,
                                       int32_t vocab_size,
                                       double temperature = 1.0);

  const std::vector<TokenEntry>& entries() const { return entries_; }
  int32_t vocab_size() const { return vocab_size_; }
  size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Sum of all stored probabilities (1 for full distributions, <= 1 if truncated).
  double total_mass() const;

  /**
   * Applies sampling temperature: each probability is raised to 1/tau and
   * the result renormalized, which equals dividing log-probabilities by tau
   * and re-softmaxing. tau = 1 is the identity. The relative order of
   * entries is preserved.
   */
  TokenDistribution with_temperature(double tau) const;

  friend bool operator==(const TokenDistribution&,
                         const TokenDistribution&) = default;

 private:
  std::vector<TokenEntry> entries_;
  int32_t vocab_size_ = 0;
};

}  // namespace eager
