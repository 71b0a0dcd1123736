#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Seeded synthetic task models with controllable difficulty.
 *
 * A task model emits a reasoning phase of low-entropy filler steps
 * interleaved with high-entropy "fork" steps, then a delimiter, a short
 * answer, and EOS. Exactly one answer token sequence is correct, and a
 * sampled generation is correct iff it takes the designed continuation at
 * every fork, which gives the per-sample success probability a closed form
 * (the product of the per-fork success probabilities).
 *
 * Difficulty controls three things:
 *  - fork-step entropy: the correct continuation's probability shrinks from
 *    1 (difficulty 0) to uniform (difficulty 1), so entropy grows from 0 to
 *    ln(alternatives);
 *  - fork count (when not overridden): harder tasks have more forks;
 *  - deception: with probability scale * difficulty^exponent a fork assigns
 *    its heavy probability to a wrong continuation, so the correct token is
 *    only the second-most-likely one. Greedy decoding fails at deceptive
 *    forks; a top-2 split at them keeps the correct path alive.
 *
 * Everything is a pure function of (difficulty, seed, shape), so identical
 * inputs yield bit-identical models.
 */

#include <optional>
#include <vector>

#include "eager/source.hpp"

namespace eager {

/// Fixed vocabulary layout used by all synthetic models.
namespace synth_vocab {
constexpr TokenId kEos = 0;
constexpr TokenId kDelimiter = 1;
constexpr TokenId kAnswerBase = 2;  // ten "digit" tokens: 2..11
constexpr int kAnswerAlphabet = 10;
constexpr TokenId kFillerBase = 12;  // eight filler tokens: 12..19
constexpr int kFillerAlphabet = 8;
constexpr TokenId kForkBase = 20;  // fork alternatives live in [20, vocab)
}  // namespace synth_vocab

/// Shape parameters for model construction; all fields have usable ("desk
/// scale") defaults. fork_count = 0 derives the count from difficulty.
struct SyntheticShape {
  int32_t vocab_size = 64;
  int reasoning_length = 32;
  double distractor_entropy = 2.995732273553991;  // ln 20
  int fork_count = 0;
  int answer_length = 3;
  double deception_scale = 1.0;
  double deception_exponent = 2.0;
  int prompt_length = 4;
  std::optional<double> fork_success_override;

  friend bool operator==(const SyntheticShape&,
                         const SyntheticShape&) = default;
};

/// One decision step of the model's script.
struct ForkSpec {
  int step = 0;                      // generated-token index of the fork
  std::vector<TokenId> alternatives; // ascending; [0] is the correct one
  TokenId correct_token = 0;
  TokenId heavy_token = 0;           // == correct_token unless deceptive
  bool deceptive = false;
  double heavy_prob = 1.0;           // probability of the heavy alternative
  double tie_prob = 0.0;             // probability of each other alternative
  double success_prob = 1.0;         // P(correct) in the tau = 1 distribution
};

class SyntheticTaskModel : public TokenSource {
 public:
  TokenDistribution next_distribution(std::span<const TokenId> context,
                                      double temperature) const override;
  int32_t vocab_size() const override { return shape_.vocab_size; }
  TokenId eos_token() const override { return synth_vocab::kEos; }

  double difficulty() const { return difficulty_; }
  uint64_t seed() const { return seed_; }
  const SyntheticShape& shape() const { return shape_; }
  int reasoning_length() const { return shape_.reasoning_length; }
  double distractor_entropy() const { return shape_.distractor_entropy; }

  const TokenList& prompt_tokens() const { return prompt_; }
  const TokenList& answer_tokens() const { return answer_; }
  const std::vector<ForkSpec>& forks() const { return forks_; }

  /// Product of per-fork success probabilities: the probability that one
  /// tau = 1, top_p = 1 sample emits the correct answer.
  double per_sample_success() const;

  /// Distribution before temperature scaling (the model's tau = 1 output).
  TokenDistribution raw_distribution(std::span<const TokenId> context) const;

 private:
  friend SyntheticTaskModel build_synthetic_model(double difficulty,
                                                  uint64_t seed,
                                                  const SyntheticShape& shape);

  double difficulty_ = 0.0;
  uint64_t seed_ = 0;
  SyntheticShape shape_;
  TokenList prompt_;
  TokenList answer_;
  std::vector<ForkSpec> forks_;
};

/**
 * Builds a model. Throws InvalidInputError when difficulty is outside
 * [0, 1] or the shape is unsatisfiable (e.g. vocabulary too small for the
 * requested fork arity).
 */
SyntheticTaskModel build_synthetic_model(double difficulty, uint64_t seed,
                                         const SyntheticShape& shape = {});

}  // namespace eager
