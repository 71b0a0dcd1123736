#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Token selection primitives: nucleus (top-p) sampling and the greedy
 * top-2 split used at branch points.
 */

#include <utility>

#include "eager/distribution.hpp"
#include "eager/rng.hpp"

namespace eager {

/**
 * Nucleus sampling: restricts the draw to the smallest prefix of the
 * descending-ordered distribution whose cumulative mass reaches top_p,
 * renormalizes it, and draws one token from the stream.
 *
 * For truncated distributions whose total mass never reaches top_p the
 * nucleus is the whole distribution. Throws DegenerateDistributionError
 * when there is no mass to draw from.
 */
TokenId sample_token(const TokenDistribution& dist, double top_p,
                     RandomStream& stream);

/**
 * The two most likely tokens, used to start the two continuations of a
 * branch. Ties are broken by taking the lowest token ids among the
 * maximal set. Throws InsufficientLogprobsError with fewer than 2 entries.
 */
std::pair<TokenId, TokenId> branch_split(const TokenDistribution& dist);

/// Most likely token (ties -> lowest token id).
TokenId argmax_token(const TokenDistribution& dist);

}  // namespace eager
