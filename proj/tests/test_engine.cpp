#include <doctest.h>

#include <cmath>

#include <eager/engine.hpp>
#include <eager/errors.hpp>
#include <eager/source.hpp>

using namespace eager;

namespace {

PromptTask basic_task(TokenList prompt = {5}) {
  PromptTask task;
  task.id = "t0";
  task.prompt_tokens = std::move(prompt);
  return task;
}

EngineConfig engine_config(double theta, int max_steps = 16) {
  EngineConfig cfg;
  cfg.theta = theta;
  cfg.temperature = 1.0;
  cfg.top_p = 1.0;
  cfg.K = 8;
  cfg.max_steps = max_steps;
  cfg.seed = 0x5EED;
  return cfg;
}

ScriptedModel chain_model() {
  // 5 -> 1 -> 3 -> eos, entirely deterministic.
  ScriptedModel model(8, 0, 1, TokenDistribution({{3, 1.0}}, 8));
  model.add_transition({5}, TokenDistribution({{1, 1.0}}, 8));
  model.add_transition({1}, TokenDistribution({{3, 1.0}}, 8));
  model.add_transition({3}, TokenDistribution({{0, 1.0}}, 8));
  return model;
}

/// Branch soundness: every monitored step with entropy >= theta must either
/// branch or carry an explicit block reason.
void check_branch_trichotomy(const GenerationTree& tree, double theta) {
  for (const EngineEvent& e : tree.events) {
    if (!e.entropy || *e.entropy < theta) continue;
    if (e.action == EngineAction::branch) continue;
    REQUIRE(e.action == EngineAction::sample);
    REQUIRE(e.block.has_value());
  }
}

}  // namespace

TEST_CASE("a zero-entropy prompt yields a single unbranched sequence") {
  const ScriptedModel model = chain_model();
  const GenerationTree tree =
      generate(basic_task(), engine_config(0.5), model, 32);

  CHECK(tree.sequence_count == 1);
  CHECK(tree.branch_events.empty());
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].status == NodeStatus::finished_eos);
  CHECK(tree.nodes[0].local_tokens == TokenList{1, 3, 0});
  CHECK(tree.new_token_count == 3);

  const auto sequences = materialize_sequences(tree);
  REQUIRE(sequences.size() == 1);
  CHECK(sequences[0].tokens == TokenList{5, 1, 3, 0});
}

TEST_CASE("one high-entropy step splits the sequence in two") {
  ScriptedModel model(8, 0, 1, TokenDistribution({{3, 1.0}}, 8));
  model.add_transition({5}, TokenDistribution({{4, 1.0}}, 8));
  model.add_transition({4}, TokenDistribution({{1, 0.5}, {2, 0.5}}, 8));
  model.add_transition({1}, TokenDistribution({{3, 1.0}}, 8));
  model.add_transition({2}, TokenDistribution({{3, 1.0}}, 8));
  model.add_transition({3}, TokenDistribution({{0, 1.0}}, 8));

  const GenerationTree tree =
      generate(basic_task(), engine_config(0.5), model, 32);

  CHECK(tree.sequence_count == 2);
  REQUIRE(tree.branch_events.size() == 1);
  CHECK(tree.branch_events[0].step == 1);
  CHECK(tree.branch_events[0].entropy ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const auto sequences = materialize_sequences(tree);
  REQUIRE(sequences.size() == 2);
  // Shared prefix up to the branch step, diverging exactly there; the
  // greedy continuation takes the lower token id of the tie.
  CHECK(sequences[0].tokens == TokenList{5, 4, 1, 3, 0});
  CHECK(sequences[1].tokens == TokenList{5, 4, 2, 3, 0});
  CHECK(tree.nodes[1].branch_step == 2);
  CHECK(tree.new_token_count == 7);  // 4 + 3 locally generated tokens

  // Prefix reuse: strictly below the flat total once a branch exists.
  long long flat = 0;
  for (const auto& s : sequences) {
    flat += static_cast<long long>(s.tokens.size()) - 1;
  }
  CHECK(tree.new_token_count < flat);
}

TEST_CASE("branching saturates exactly at the cap") {
  // Uniform over {1, 2} everywhere: entropy ln 2 at every step.
  ScriptedModel model(8, 0, 1, TokenDistribution({{1, 0.5}, {2, 0.5}}, 8));

  const GenerationTree tree =
      generate(basic_task(), engine_config(0.1, 6), model, 4);

  CHECK(tree.sequence_count == 4);
  CHECK(tree.branch_events.size() == 3);
  for (const SequenceNode& node : tree.nodes) {
    CHECK(node.status == NodeStatus::finished_length);
  }
  check_branch_trichotomy(tree, 0.1);

  // After saturation, high-entropy steps must be blocked by the cap.
  bool saw_cap_block = false;
  for (const EngineEvent& e : tree.events) {
    if (e.block && *e.block == BranchBlock::cap) saw_cap_block = true;
  }
  CHECK(saw_cap_block);
}

TEST_CASE("halt rule stops entropy monitoring permanently") {
  ScriptedModel model(8, 0, 1, TokenDistribution({{3, 1.0}}, 8));
  model.add_transition({5}, TokenDistribution({{1, 1.0}}, 8));
  model.add_transition({1}, TokenDistribution({{2, 1.0}}, 8));
  model.add_transition({2}, TokenDistribution({{3, 1.0}}, 8));
  model.add_transition({3}, TokenDistribution({{4, 0.5}, {6, 0.5}}, 8));
  model.add_transition({4}, TokenDistribution({{0, 1.0}}, 8));
  model.add_transition({6}, TokenDistribution({{0, 1.0}}, 8));

  EngineConfig cfg = engine_config(0.5);
  cfg.halt_window = 2;
  const GenerationTree tree = generate(basic_task(), cfg, model, 32);

  CHECK(tree.sequence_count == 1);
  CHECK(tree.branch_events.empty());

  // Halt fires at step 2; no entropy is recorded from then on, even though
  // step 3 would have been a high-entropy step.
  bool saw_halt = false;
  for (const EngineEvent& e : tree.events) {
    if (e.action == EngineAction::halt) {
      saw_halt = true;
      CHECK(e.step == 2);
    }
    if (e.step >= 2 && e.action == EngineAction::sample) {
      CHECK_FALSE(e.entropy.has_value());
    }
  }
  CHECK(saw_halt);
  for (const EntropyObservation& o : tree.nodes[0].local_entropy) {
    CHECK(o.step < 2);
  }
}

TEST_CASE("span rule blocks branching after the delimiter") {
  ScriptedModel model(8, 0, 1, TokenDistribution({{0, 1.0}, {1, 0.0}}, 8));
  model.add_transition({5}, TokenDistribution({{7, 1.0}}, 8));
  model.add_transition({7}, TokenDistribution({{1, 0.5}, {2, 0.5}}, 8));
  model.add_transition({1}, TokenDistribution({{0, 1.0}}, 8));
  model.add_transition({2}, TokenDistribution({{0, 1.0}}, 8));

  PromptTask task = basic_task();
  task.span_policy = SpanPolicy::until_delimiter;
  task.span_delimiter = 7;

  const GenerationTree tree = generate(task, engine_config(0.5), model, 32);

  CHECK(tree.sequence_count == 1);
  CHECK(tree.branch_events.empty());
  bool saw_span_block = false;
  for (const EngineEvent& e : tree.events) {
    if (e.block && *e.block == BranchBlock::span) {
      saw_span_block = true;
      CHECK(e.step == 1);
      CHECK(*e.entropy >= 0.5);
    }
  }
  CHECK(saw_span_block);
  check_branch_trichotomy(tree, 0.5);
}

TEST_CASE("higher theta never increases sequences or branch events") {
  ScriptedModel model(8, 0, 1, TokenDistribution({{1, 0.6}, {2, 0.4}}, 8));
  model.add_transition({2}, TokenDistribution({{0, 0.8}, {1, 0.2}}, 8));

  int prev_seq = INT32_MAX;
  size_t prev_branches = SIZE_MAX;
  for (double theta : {0.3, 0.5, 0.65, 0.8}) {
    EngineConfig cfg = engine_config(theta, 10);
    const GenerationTree tree = generate(basic_task(), cfg, model, 8);
    CHECK(tree.sequence_count <= prev_seq);
    CHECK(tree.branch_events.size() <= prev_branches);
    prev_seq = tree.sequence_count;
    prev_branches = tree.branch_events.size();
  }
}

TEST_CASE("identical inputs give bit-identical trees") {
  ScriptedModel model(8, 0, 1,
                      TokenDistribution({{1, 0.5}, {2, 0.3}, {0, 0.2}}, 8));
  const EngineConfig cfg = engine_config(0.6, 12);
  const GenerationTree a = generate(basic_task(), cfg, model, 4);
  const GenerationTree b = generate(basic_task(), cfg, model, 4);
  CHECK(a == b);

  EngineConfig other = cfg;
  other.seed += 1;
  const GenerationTree c = generate(basic_task(), other, model, 4);
  CHECK_FALSE(a == c);
}

TEST_CASE("a sequence that hits the context cap is marked as such") {
  ScriptedModel model(8, 0, 1, TokenDistribution({{1, 1.0}}, 8));
  EngineConfig cfg = engine_config(0.5, 64);
  cfg.context_cap = 6;
  const GenerationTree tree = generate(basic_task(), cfg, model, 4);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].status == NodeStatus::finished_context_cap);
  // prompt (1) + generated tokens stop once the context reaches the cap
  CHECK(tree.nodes[0].local_tokens.size() == 5);
}

TEST_CASE("engine config carries the documented defaults") {
  const EngineConfig cfg;
  CHECK(cfg.temperature == doctest::Approx(0.60));
  CHECK(cfg.top_p == doctest::Approx(0.95));
  CHECK(cfg.K == 20);
  CHECK(cfg.halt_window == 1000);
  CHECK(cfg.context_cap == 32768);
}

TEST_CASE("generate validates its inputs") {
  const ScriptedModel model = chain_model();
  CHECK_THROWS_AS(generate(basic_task(), engine_config(0.5), model, 0),
                  InvalidInputError);
  PromptTask empty = basic_task();
  empty.prompt_tokens.clear();
  CHECK_THROWS_AS(generate(empty, engine_config(0.5), model, 4),
                  InvalidInputError);
  EngineConfig bad = engine_config(0.5);
  bad.theta = 0.0;
  CHECK_THROWS_AS(generate(basic_task(), bad, model, 4), InvalidInputError);
}

TEST_CASE("materialize_sequences refuses active nodes") {
  GenerationTree tree;
  tree.prompt_id = "x";
  tree.prompt_tokens = {5};
  SequenceNode node;
  node.node_id = 0;
  node.branch_step = 1;
  node.status = NodeStatus::active;
  tree.nodes.push_back(node);
  CHECK_THROWS_AS(materialize_sequences(tree), NotFinishedError);
}
