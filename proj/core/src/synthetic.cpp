// SPDX-License-Identifier: Apache-2.0

#include "eager/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "eager/errors.hpp"
#include "eager/rng.hpp"

namespace eager {

namespace {

using namespace synth_vocab;

// Hash-derived uniform in [0, 1).
double seeded_unit(uint64_t seed, uint64_t a, uint64_t b) {
  return static_cast<double>(stable_hash(seed, a, b) >> 11) * 0x1.0p-53;
}

TokenDistribution point_mass(TokenId token, int32_t vocab) {
  return TokenDistribution({{token, 1.0}}, vocab);
}

}  // namespace

SyntheticTaskModel build_synthetic_model(double difficulty, uint64_t seed,
                                         const SyntheticShape& shape) {
  if (!(difficulty >= 0.0) || difficulty > 1.0) {
    throw InvalidInputError("build_synthetic_model: difficulty must be in [0, 1]");
  }
  if (shape.reasoning_length < 2) {
    throw InvalidInputError("build_synthetic_model: reasoning_length must be >= 2");
  }
  if (shape.answer_length < 1 || shape.answer_length > 16) {
    throw InvalidInputError("build_synthetic_model: answer_length must be in [1, 16]");
  }
  if (shape.distractor_entropy < 0.0) {
    throw InvalidInputError("build_synthetic_model: distractor_entropy must be >= 0");
  }

  const int arity = std::max<int>(
      2, static_cast<int>(std::lround(std::exp(shape.distractor_entropy))));
  if (shape.vocab_size < kForkBase + arity) {
    throw InvalidInputError(
        "build_synthetic_model: vocab too small for fork arity");
  }

  SyntheticTaskModel model;
  model.difficulty_ = difficulty;
  model.seed_ = seed;
  model.shape_ = shape;

  // Prompt: a few filler tokens, seeded.
  model.prompt_.reserve(shape.prompt_length);
  for (int i = 0; i < shape.prompt_length; ++i) {
    model.prompt_.push_back(
        kFillerBase + static_cast<TokenId>(stable_hash(seed, 100 + i) %
                                           kFillerAlphabet));
  }

  // Target answer digits.
  model.answer_.reserve(shape.answer_length);
  for (int j = 0; j < shape.answer_length; ++j) {
    model.answer_.push_back(
        kAnswerBase +
        static_cast<TokenId>(stable_hash(seed, 200 + j) % kAnswerAlphabet));
  }

  int fork_count = shape.fork_count;
  if (fork_count <= 0) {
    fork_count = 1 + static_cast<int>(std::lround(4.0 * difficulty));
  }
  fork_count = std::min(fork_count, shape.reasoning_length - 1);

  // Distinct fork positions in [1, reasoning_length).
  std::set<int> positions;
  uint64_t draw = 0;
  while (static_cast<int>(positions.size()) < fork_count) {
    positions.insert(1 + static_cast<int>(stable_hash(seed, 300, draw++) %
                                          (shape.reasoning_length - 1)));
  }

  const double correct_prob =
      shape.fork_success_override
          ? *shape.fork_success_override
          : (1.0 - difficulty) + difficulty / static_cast<double>(arity);
  if (!(correct_prob > 0.0) || correct_prob > 1.0) {
    throw InvalidInputError(
        "build_synthetic_model: fork success probability must be in (0, 1]");
  }
  const double tie_prob =
      (1.0 - correct_prob) / static_cast<double>(arity - 1);

  int fork_idx = 0;
  for (int step : positions) {
    ForkSpec fork;
    fork.step = step;

    // Draw `arity` distinct alternative tokens from the fork pool; the
    // lowest id plays the correct continuation so that a tie group always
    // ranks it first.
    std::set<TokenId> alts;
    uint64_t adraw = 0;
    const uint64_t pool =
        static_cast<uint64_t>(shape.vocab_size) - kForkBase;
    while (static_cast<int>(alts.size()) < arity) {
      alts.insert(kForkBase +
                  static_cast<TokenId>(
                      stable_hash(seed, 400 + fork_idx, adraw++) % pool));
    }
    fork.alternatives.assign(alts.begin(), alts.end());
    fork.correct_token = fork.alternatives.front();

    const double deception_p =
        shape.deception_scale *
        std::pow(difficulty, shape.deception_exponent);
    fork.deceptive = correct_prob > tie_prob &&
                     seeded_unit(seed, 500, fork_idx) < deception_p;
    fork.heavy_prob = correct_prob;
    fork.tie_prob = tie_prob;
    if (fork.deceptive) {
      const size_t pick =
          1 + stable_hash(seed, 600, fork_idx) %
                  (fork.alternatives.size() - 1);
      fork.heavy_token = fork.alternatives[pick];
      fork.success_prob = tie_prob;
    } else {
      fork.heavy_token = fork.correct_token;
      fork.success_prob = correct_prob;
    }
    model.forks_.push_back(std::move(fork));
    ++fork_idx;
  }

  return model;
}

double SyntheticTaskModel::per_sample_success() const {
  double q = 1.0;
  for (const ForkSpec& f : forks_) q *= f.success_prob;
  return q;
}

TokenDistribution SyntheticTaskModel::raw_distribution(
    std::span<const TokenId> context) const {
  using namespace synth_vocab;
  if (context.size() < prompt_.size()) {
    throw InvalidInputError("synthetic model: context shorter than prompt");
  }
  const int g = static_cast<int>(context.size() - prompt_.size());
  const int32_t vocab = shape_.vocab_size;

  if (g < shape_.reasoning_length) {
    for (const ForkSpec& fork : forks_) {
      if (fork.step != g) continue;
      std::vector<TokenEntry> entries;
      entries.reserve(fork.alternatives.size());
      for (TokenId t : fork.alternatives) {
        entries.push_back(
            {t, t == fork.heavy_token ? fork.heavy_prob : fork.tie_prob});
      }
      return TokenDistribution(std::move(entries), vocab);
    }
    // Filler: a deterministic low-entropy step.
    const TokenId filler =
        kFillerBase +
        static_cast<TokenId>(stable_hash(seed_, 700, g) % kFillerAlphabet);
    return point_mass(filler, vocab);
  }

  if (g == shape_.reasoning_length) {
    return point_mass(kDelimiter, vocab);
  }

  // Answer phase: correctness is decided by the fork continuations taken.
  bool on_target = true;
  uint64_t wrong_sig = 0;
  for (const ForkSpec& fork : forks_) {
    const TokenId taken = context[prompt_.size() + fork.step];
    if (taken != fork.correct_token) {
      on_target = false;
      wrong_sig = stable_hash(wrong_sig, static_cast<uint64_t>(fork.step),
                              static_cast<uint64_t>(taken));
    }
  }

  const int a = g - shape_.reasoning_length - 1;
  if (a < shape_.answer_length) {
    TokenId tok;
    if (on_target) {
      tok = answer_[a];
    } else {
      tok = kAnswerBase +
            static_cast<TokenId>(stable_hash(wrong_sig, 800 + a) %
                                 kAnswerAlphabet);
      // A wrong path must never reproduce the target answer; nudge the
      // first digit if the hash happens to collide.
      if (a == 0 && tok == answer_[0]) {
        bool tail_matches = true;
        for (int j = 1; j < shape_.answer_length && tail_matches; ++j) {
          tail_matches = kAnswerBase + static_cast<TokenId>(stable_hash(
                             wrong_sig, 800 + j) % kAnswerAlphabet) ==
                         answer_[j];
        }
        if (tail_matches) {
          tok = kAnswerBase + (tok - kAnswerBase + 1) % kAnswerAlphabet;
        }
      }
    }
    return point_mass(tok, vocab);
  }

  return point_mass(kEos, vocab);
}

TokenDistribution SyntheticTaskModel::next_distribution(
    std::span<const TokenId> context, double temperature) const {
  return raw_distribution(context).with_temperature(temperature);
}

}  // namespace eager
