// SPDX-License-Identifier: Apache-2.0

#include "eager/sampling.hpp"

#include "eager/errors.hpp"

namespace eager {

TokenId sample_token(const TokenDistribution& dist, double top_p,
                     RandomStream& stream) {
  if (dist.empty()) {
    throw InvalidInputError("sample_token: empty distribution");
  }
  if (!(top_p > 0.0) || top_p > 1.0) {
    throw InvalidInputError("sample_token: top_p must be in (0, 1]");
  }

  const auto& entries = dist.entries();

  // Entries are already in descending order, so the nucleus is a prefix.
  size_t nucleus = entries.size();
  double mass = 0.0;
  for (size_t i = 0; i < entries.size(); ++i) {
    mass += entries[i].prob;
    if (mass >= top_p) {
      nucleus = i + 1;
      break;
    }
  }
  if (nucleus == entries.size()) {
    // Truncated distribution that never reaches top_p: keep everything.
    mass = dist.total_mass();
  }
  if (mass <= 0.0) {
    throw DegenerateDistributionError("sample_token: zero mass in nucleus");
  }

  const double u = stream.next_unit() * mass;
  double cum = 0.0;
  for (size_t i = 0; i < nucleus; ++i) {
    cum += entries[i].prob;
    if (u < cum) return entries[i].token;
  }
  // Rounding fell off the end; return the last nucleus token.
  return entries[nucleus - 1].token;
}

std::pair<TokenId, TokenId> branch_split(const TokenDistribution& dist) {
  if (dist.size() < 2) {
    throw InsufficientLogprobsError(
        "branch_split: need at least 2 entries to split");
  }
  // Canonical ordering (descending prob, ascending id on ties) makes the
  // first two entries exactly the maximal-set lowest-id pair.
  const auto& entries = dist.entries();
  return {entries[0].token, entries[1].token};
}

TokenId argmax_token(const TokenDistribution& dist) {
  if (dist.empty()) {
    throw InvalidInputError("argmax_token: empty distribution");
  }
  return dist.entries().front().token;
}

}  // namespace eager
