#pragma once

// Seeded scripted-model fixture generator shared by the engine oracle
// suite and the acceptance runner.

#include <eager/engine.hpp>
#include <eager/rng.hpp>
#include <eager/source.hpp>

namespace testgen {

struct OracleFixture {
  eager::ScriptedModel model;
  eager::PromptTask task;
  eager::EngineConfig config;
  int cap = 1;
};

/// Random distribution over a small vocab: point mass, uniform prefix, or
/// Dirichlet-like, chosen by the stream.
inline eager::TokenDistribution small_dist(eager::RandomStream& rng,
                                           int32_t vocab) {
  using eager::TokenEntry;
  const int kind = static_cast<int>(rng.next_below(3));
  std::vector<TokenEntry> entries;
  if (kind == 0) {
    entries.push_back(
        {static_cast<eager::TokenId>(rng.next_below(vocab)), 1.0});
  } else if (kind == 1) {
    const int k = 2 + static_cast<int>(rng.next_below(vocab - 1));
    for (int t = 0; t < k; ++t) {
      entries.push_back({static_cast<eager::TokenId>(t), 1.0 / k});
    }
  } else {
    double sum = 0.0;
    for (int t = 0; t < vocab; ++t) {
      const double w = 0.05 + rng.next_unit();
      entries.push_back({static_cast<eager::TokenId>(t), w});
      sum += w;
    }
    for (auto& e : entries) e.prob /= sum;
  }
  return eager::TokenDistribution(std::move(entries), vocab);
}

inline OracleFixture oracle_fixture(uint64_t seed) {
  using namespace eager;
  RandomStream rng(seed);

  const int32_t vocab = 3 + static_cast<int32_t>(rng.next_below(6));  // 3..8
  const int window = 1 + static_cast<int>(rng.next_below(2));

  ScriptedModel model(vocab, /*eos=*/0, window, small_dist(rng, vocab));
  const int n_transitions = 2 + static_cast<int>(rng.next_below(6));
  for (int i = 0; i < n_transitions; ++i) {
    TokenList suffix;
    const int len = 1 + static_cast<int>(rng.next_below(window));
    for (int j = 0; j < len; ++j) {
      suffix.push_back(static_cast<TokenId>(rng.next_below(vocab)));
    }
    model.add_transition(std::move(suffix), small_dist(rng, vocab));
  }

  PromptTask task;
  task.id = "fixture-" + std::to_string(seed);
  task.prompt_tokens = {
      static_cast<TokenId>(1 + rng.next_below(vocab - 1))};
  if (rng.next_below(4) == 0 && vocab > 2) {
    task.span_policy = SpanPolicy::until_delimiter;
    task.span_delimiter = 2;
  }

  EngineConfig config;
  const double thetas[] = {0.3, 0.55, 0.8, 1.2};
  config.theta = thetas[rng.next_below(4)];
  config.temperature = 1.0;
  config.top_p = rng.next_below(2) == 0 ? 1.0 : 0.9;
  config.K = vocab;
  config.max_steps = 4 + static_cast<int>(rng.next_below(9));  // 4..12
  const int windows[] = {2, 3, 100};
  config.halt_window = windows[rng.next_below(3)];
  config.seed = stable_hash(seed, 77);

  OracleFixture fixture{std::move(model), std::move(task), config,
                        /*cap=*/1 + static_cast<int>(rng.next_below(4))};
  return fixture;
}

}  // namespace testgen
