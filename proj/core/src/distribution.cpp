// SPDX-License-Identifier: Apache-2.0

#include "eager/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "eager/errors.hpp"

namespace eager {

namespace {

constexpr double kMassSlack = 1e-9;

void canonical_sort(std::vector<TokenEntry>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const TokenEntry& a, const TokenEntry& b) {
              if (a.prob != b.prob) return a.prob > b.prob;
              return a.token < b.token;
            });
}

}  // namespace

TokenDistribution::TokenDistribution(std::vector<TokenEntry> entries,
                                     int32_t vocab_size)
    : entries_(std::move(entries)), vocab_size_(vocab_size) {
  if (vocab_size_ <= 0) {
    throw InvalidInputError("TokenDistribution: vocab_size must be positive");
  }
  double total = 0.0;
  std::unordered_set<TokenId> seen;
  seen.reserve(entries_.size());
  for (const TokenEntry& e : entries_) {
    if (e.token < 0 || e.token >= vocab_size_) {
      throw InvalidInputError("TokenDistribution: token id out of vocab range");
    }
    if (!(e.prob >= 0.0) || !std::isfinite(e.prob)) {
      throw InvalidInputError("TokenDistribution: probability must be finite and >= 0");
    }
    if (!seen.insert(e.token).second) {
      throw InvalidInputError("TokenDistribution: duplicate token id");
    }
    total += e.prob;
  }
  if (total > 1.0 + kMassSlack) {
    throw InvalidInputError("TokenDistribution: probabilities sum above 1");
  }
  canonical_sort(entries_);
}

TokenDistribution TokenDistribution::from_logits(std::span<const double> logits,
                                                 int32_t vocab_size,
                                                 double temperature) {
  if (logits.empty()) {
    throw InvalidInputError("from_logits: empty logits");
  }
  if (!(temperature > 0.0)) {
    throw InvalidInputError("from_logits: temperature must be positive");
  }
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double z : logits) max_logit = std::max(max_logit, z);

  std::vector<TokenEntry> entries;
  entries.reserve(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    double e = std::exp((logits[i] - max_logit) / temperature);
    entries.push_back({static_cast<TokenId>(i), e});
    sum += e;
  }
  for (TokenEntry& e : entries) e.prob /= sum;
  return TokenDistribution(std::move(entries), vocab_size);
}

double TokenDistribution::total_mass() const {
  double total = 0.0;
  for (const TokenEntry& e : entries_) total += e.prob;
  return total;
}

TokenDistribution TokenDistribution::with_temperature(double tau) const {
  if (!(tau > 0.0)) {
    throw InvalidInputError("with_temperature: temperature must be positive");
  }
  if (empty()) {
    throw InvalidInputError("with_temperature: empty distribution");
  }
  if (tau == 1.0) return *this;

  // Scale relative to the maximum probability before exponentiating so
  // small probabilities at low tau underflow to 0 instead of producing
  // 0/0 when everything underflows at once.
  const double p_max = entries_.front().prob;
  if (p_max <= 0.0) {
    throw DegenerateDistributionError("with_temperature: zero total mass");
  }
  std::vector<TokenEntry> scaled;
  scaled.reserve(entries_.size());
  double sum = 0.0;
  for (const TokenEntry& e : entries_) {
    double p = e.prob > 0.0 ? std::pow(e.prob / p_max, 1.0 / tau) : 0.0;
    scaled.push_back({e.token, p});
    sum += p;
  }
  for (TokenEntry& e : scaled) e.prob /= sum;
  return TokenDistribution(std::move(scaled), vocab_size_);
}

}  // namespace eager
