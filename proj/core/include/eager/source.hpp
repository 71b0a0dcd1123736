#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Token sources: anything that can produce a next-token distribution for a
 * token context. Three backends exist behind the same interface:
 *
 *  - scripted:  deterministic fixtures keyed by a context-suffix window,
 *               loaded from a JSON file (see docs in README);
 *  - synthetic: seeded task models with controllable difficulty
 *               (synthetic.hpp);
 *  - remote:    HTTP client for a logprobs-serving completion endpoint
 *               (remote.hpp).
 *
 * Scripted and synthetic backends are stateless after construction and
 * bit-deterministic; all backends tolerate concurrent calls.
 */

#include <map>
#include <memory>
#include <span>
#include <string>

#include "eager/distribution.hpp"
#include "eager/types.hpp"

namespace eager {

enum class SourceKind { scripted, synthetic, remote };

std::string to_string(SourceKind kind);
SourceKind source_kind_from_string(const std::string& s);

/// Declarative description of a source; `params` is backend-specific and
/// carried verbatim in configs (JSON object encoded as a string).
struct SourceDescriptor {
  SourceKind kind = SourceKind::scripted;
  int32_t vocab_size = 0;
  TokenId eos_token = 0;
  std::string params_json = "{}";
};

class TokenSource {
 public:
  virtual ~TokenSource() = default;

  /**
   * Next-token distribution for a context at a sampling temperature.
   * The context always contains at least the prompt tokens.
   */
  virtual TokenDistribution next_distribution(std::span<const TokenId> context,
                                              double temperature) const = 0;

  virtual int32_t vocab_size() const = 0;
  virtual TokenId eos_token() const = 0;
};

/**
 * Scripted model: a map from a bounded-length context suffix to a
 * distribution, plus a default distribution for unmapped contexts.
 * Stored probabilities are taken as the tau = 1 distribution; requesting
 * another temperature applies the standard power scaling.
 */
class ScriptedModel : public TokenSource {
 public:
  ScriptedModel(int32_t vocab_size, TokenId eos_token, int window,
                TokenDistribution default_dist);

  /// Registers the distribution for an exact context suffix (length <= window).
  void add_transition(TokenList suffix, TokenDistribution dist);

  TokenDistribution next_distribution(std::span<const TokenId> context,
                                      double temperature) const override;
  int32_t vocab_size() const override { return vocab_size_; }
  TokenId eos_token() const override { return eos_token_; }
  int window() const { return window_; }

  /// Loads a model from the JSON fixture format documented in the README.
  static ScriptedModel load(const std::string& path);
  static ScriptedModel from_json_text(const std::string& text);

 private:
  int32_t vocab_size_;
  TokenId eos_token_;
  int window_;
  TokenDistribution default_dist_;
  std::map<TokenList, TokenDistribution> transitions_;
};

}  // namespace eager
