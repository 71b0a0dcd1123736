#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Answer verification and metrics.
 *
 * Per prompt with k evaluated sequences:
 *  - Pass@k:    1 iff any sequence's extracted answer matches the target;
 *  - Cons@k:    1 iff the majority-vote answer matches the target (ties
 *               broken by the lexicographically smallest tied answer);
 *  - Pass Rate: fraction of sequences whose answer matches.
 *
 * Dataset metrics are arithmetic means over prompts, each at its own k.
 * Matching is exact on the canonical answer form; an empty answer is a
 * legal value meaning "no answer found".
 */

#include <optional>
#include <string>
#include <vector>

#include "eager/engine.hpp"
#include "eager/types.hpp"

namespace eager {

enum class ExtractStrategy { delimiter_suffix, boxed_pattern, full_tail };

std::string to_string(ExtractStrategy strategy);
ExtractStrategy extract_strategy_from_string(const std::string& s);

struct AnswerExtractorConfig {
  ExtractStrategy strategy = ExtractStrategy::delimiter_suffix;
  TokenId delimiter = 0;               // delimiter_suffix
  std::string pattern = "\\boxed{";    // boxed_pattern: prefix before the answer
  int tail_length = 1;                 // full_tail
};

/// Canonical string form of a token-list answer ("" = no answer).
std::string canonical_answer(const TokenList& tokens);

/**
 * Deterministic answer extraction from a finished sequence.
 *
 * - delimiter_suffix: tokens after the last delimiter, EOS stripped;
 * - boxed_pattern: the sequence is detokenized one code point per token id
 *   and the text inside the last `pattern`...`}` is returned;
 * - full_tail: the last tail_length tokens, EOS stripped.
 *
 * Absence of an answer is the empty string, not an error.
 */
std::string extract_answer(const TokenList& sequence, TokenId eos_token,
                           const AnswerExtractorConfig& cfg);

struct PromptEvaluation {
  PromptId prompt_id;
  int k = 0;
  std::vector<bool> correct_flags;
  std::vector<std::string> extracted_answers;
  int pass_at_k = 0;
  int cons_at_k = 0;
  double pass_rate = 0.0;
};

/**
 * Evaluates one prompt's sequences against its target answer.
 * Throws InvalidInputError when there are no sequences.
 */
PromptEvaluation evaluate_prompt(const PromptId& prompt_id,
                                 const std::vector<TokenList>& sequences,
                                 const TokenList& target, TokenId eos_token,
                                 const AnswerExtractorConfig& cfg);

struct Correlation {
  double coefficient = 0.0;
  int n = 0;
};

struct MetricsReport {
  double mean_pass_at_k = 0.0;
  double mean_cons_at_k = 0.0;
  double mean_pass_rate = 0.0;
  long long total_new_tokens = 0;
  long long total_sequences = 0;
  std::vector<PromptEvaluation> per_prompt;
  std::optional<Correlation> correlation;
};

/**
 * Dataset-level aggregation. Evaluations and trees must cover the same
 * prompt set (same ids, same order). Throws InvalidInputError otherwise.
 */
MetricsReport aggregate(const std::vector<PromptEvaluation>& per_prompt,
                        const std::vector<GenerationTree>& trees);

/**
 * Pearson product-moment correlation over (peak entropy, pass rate) pairs.
 * Throws InvalidInputError for n < 3 and UndefinedCorrelationError when
 * either coordinate has zero variance.
 */
Correlation peak_pass_correlation(
    const std::vector<std::pair<double, double>>& pairs);

}  // namespace eager
