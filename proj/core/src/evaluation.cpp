// SPDX-License-Identifier: Apache-2.0

#include "eager/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "eager/errors.hpp"

namespace eager {

std::string to_string(ExtractStrategy strategy) {
  switch (strategy) {
    case ExtractStrategy::delimiter_suffix: return "delimiter_suffix";
    case ExtractStrategy::boxed_pattern: return "boxed_pattern";
    case ExtractStrategy::full_tail: return "full_tail";
  }
  return "delimiter_suffix";
}

ExtractStrategy extract_strategy_from_string(const std::string& s) {
  if (s == "delimiter_suffix") return ExtractStrategy::delimiter_suffix;
  if (s == "boxed_pattern") return ExtractStrategy::boxed_pattern;
  if (s == "full_tail") return ExtractStrategy::full_tail;
  throw InvalidInputError("unknown extractor strategy: " + s);
}

std::string canonical_answer(const TokenList& tokens) {
  std::ostringstream out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out << ' ';
    out << tokens[i];
  }
  return out.str();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::string extract_answer(const TokenList& sequence, TokenId eos_token,
                           const AnswerExtractorConfig& cfg) {
  TokenList body = sequence;
  while (!body.empty() && body.back() == eos_token) body.pop_back();

  switch (cfg.strategy) {
    case ExtractStrategy::delimiter_suffix: {
      auto it = std::find(body.rbegin(), body.rend(), cfg.delimiter);
      if (it == body.rend()) return "";
      TokenList tail(it.base(), body.end());
      return canonical_answer(tail);
    }
    case ExtractStrategy::boxed_pattern: {
      // Trivial detokenizer: one code point per token id.
      std::string text;
      text.reserve(body.size());
      for (TokenId t : body) {
        text.push_back(static_cast<char>(static_cast<unsigned char>(t)));
      }
      const size_t open = text.rfind(cfg.pattern);
      if (open == std::string::npos) return "";
      const size_t start = open + cfg.pattern.size();
      const size_t close = text.find('}', start);
      if (close == std::string::npos) return "";
      return std::string(trim(std::string_view(text).substr(
          start, close - start)));
    }
    case ExtractStrategy::full_tail: {
      if (cfg.tail_length < 1) return "";
      const size_t take =
          std::min(static_cast<size_t>(cfg.tail_length), body.size());
      TokenList tail(body.end() - take, body.end());
      return canonical_answer(tail);
    }
  }
  return "";
}

PromptEvaluation evaluate_prompt(const PromptId& prompt_id,
                                 const std::vector<TokenList>& sequences,
                                 const TokenList& target, TokenId eos_token,
                                 const AnswerExtractorConfig& cfg) {
  if (sequences.empty()) {
    throw InvalidInputError("evaluate_prompt: no sequences for '" + prompt_id +
                            "'");
  }
  PromptEvaluation eval;
  eval.prompt_id = prompt_id;
  eval.k = static_cast<int>(sequences.size());

  const std::string target_answer = canonical_answer(target);
  int correct = 0;
  std::map<std::string, int> votes;
  for (const TokenList& seq : sequences) {
    const std::string answer = extract_answer(seq, eos_token, cfg);
    const bool ok = answer == target_answer;
    eval.extracted_answers.push_back(answer);
    eval.correct_flags.push_back(ok);
    correct += ok ? 1 : 0;
    votes[answer] += 1;
  }

  eval.pass_at_k = correct > 0 ? 1 : 0;
  eval.pass_rate = static_cast<double>(correct) / eval.k;

  // Majority vote; std::map iteration is lexicographic, so the first
  // maximal entry is the tie-break winner.
  std::string majority;
  int best = 0;
  for (const auto& [answer, count] : votes) {
    if (count > best) {
      best = count;
      majority = answer;
    }
  }
  eval.cons_at_k = majority == target_answer ? 1 : 0;
  return eval;
}

MetricsReport aggregate(const std::vector<PromptEvaluation>& per_prompt,
                        const std::vector<GenerationTree>& trees) {
  if (per_prompt.size() != trees.size()) {
    throw InvalidInputError("aggregate: evaluation/tree count mismatch");
  }
  MetricsReport report;
  for (size_t i = 0; i < per_prompt.size(); ++i) {
    if (per_prompt[i].prompt_id != trees[i].prompt_id) {
      throw InvalidInputError("aggregate: prompt set mismatch at index " +
                              std::to_string(i));
    }
    report.mean_pass_at_k += per_prompt[i].pass_at_k;
    report.mean_cons_at_k += per_prompt[i].cons_at_k;
    report.mean_pass_rate += per_prompt[i].pass_rate;
    report.total_new_tokens += trees[i].new_token_count;
    report.total_sequences += trees[i].sequence_count;
  }
  if (!per_prompt.empty()) {
    const double n = static_cast<double>(per_prompt.size());
    report.mean_pass_at_k /= n;
    report.mean_cons_at_k /= n;
    report.mean_pass_rate /= n;
  }
  report.per_prompt = per_prompt;
  return report;
}

Correlation peak_pass_correlation(
    const std::vector<std::pair<double, double>>& pairs) {
  const size_t n = pairs.size();
  if (n < 3) {
    throw InvalidInputError("peak_pass_correlation: need at least 3 pairs");
  }
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& [x, y] : pairs) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const auto& [x, y] : pairs) {
    const double dx = x - mean_x;
    const double dy = y - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedCorrelationError(
        "peak_pass_correlation: zero variance in one coordinate");
  }
  return {sxy / std::sqrt(sxx * syy), static_cast<int>(n)};
}

}  // namespace eager
