#pragma once

// SPDX-License-Identifier: Apache-2.0

#include <optional>

#include "eager/synthetic.hpp"
#include "eager/types.hpp"

namespace eager {

/// Where branching is allowed within a sequence's output.
enum class SpanPolicy {
  whole_output,     // the whole generation counts as reasoning
  until_delimiter,  // reasoning ends once the delimiter token appears
};

/// One prompt of a benchmark: identity, tokens, optional target, and the
/// branching span policy. `difficulty` is task metadata for analysis only;
/// the generation engine never reads it.
struct PromptTask {
  PromptId id;
  TokenList prompt_tokens;
  std::optional<TokenList> target_answer;
  double difficulty = 0.0;
  SpanPolicy span_policy = SpanPolicy::whole_output;
  std::optional<TokenId> span_delimiter;
  std::optional<SyntheticTaskModel> model;  // set for synthetic tasks
};

}  // namespace eager
