#include <doctest.h>

#include <cmath>
#include <cstdio>

#include <eager/bench.hpp>
#include <eager/errors.hpp>

using namespace eager;

namespace {

BenchSpec simple_spec(int n, uint64_t seed) {
  BenchSpec spec;
  spec.n_prompts = n;
  spec.difficulty_distribution = {{0.0, 1.0}};
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("generate_task_set is deterministic and sized") {
  const BenchSpec spec = simple_spec(10, 7);
  const auto a = generate_task_set(spec);
  const auto b = generate_task_set(spec);
  REQUIRE(a.size() == 10);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].prompt_tokens == b[i].prompt_tokens);
    CHECK(a[i].target_answer == b[i].target_answer);
    CHECK(a[i].difficulty == 0.0);
    REQUIRE(a[i].model.has_value());
    CHECK(a[i].model->per_sample_success() == doctest::Approx(1.0));
  }
}

TEST_CASE("difficulty mixture is honored empirically") {
  BenchSpec spec = simple_spec(200, 1);
  spec.difficulty_distribution = {{0.1, 0.5}, {0.9, 0.5}};
  const auto tasks = generate_task_set(spec);
  int low = 0;
  for (const PromptTask& t : tasks) {
    if (t.difficulty == 0.1) ++low;
  }
  const double frac = static_cast<double>(low) / 200.0;
  CHECK(frac > 0.45);
  CHECK(frac < 0.55);
}

TEST_CASE("generate_task_set validates the spec") {
  CHECK_THROWS_AS(generate_task_set(simple_spec(0, 1)), InvalidInputError);
  BenchSpec bad = simple_spec(5, 1);
  bad.difficulty_distribution = {{0.5, 0.7}};
  CHECK_THROWS_AS(generate_task_set(bad), InvalidInputError);
  bad = simple_spec(5, 1);
  bad.reasoning_length_min = 50;
  bad.reasoning_length_max = 10;
  CHECK_THROWS_AS(generate_task_set(bad), InvalidInputError);
}

TEST_CASE("expected_pass_probability closed form") {
  BenchSpec spec = simple_spec(1, 3);
  spec.shape.fork_count = 1;
  spec.shape.distractor_entropy = std::log(4.0);
  spec.shape.deception_scale = 0.0;
  spec.shape.fork_success_override = 0.5;
  spec.difficulty_distribution = {{1.0, 1.0}};
  const auto tasks = generate_task_set(spec);
  REQUIRE(tasks.size() == 1);

  CHECK(expected_pass_probability(tasks[0], 1) == doctest::Approx(0.5));
  CHECK(expected_pass_probability(tasks[0], 4) == doctest::Approx(0.9375));

  PromptTask no_model;
  no_model.id = "x";
  CHECK_THROWS_AS(expected_pass_probability(no_model, 4), UnsupportedError);
  CHECK_THROWS_AS(expected_pass_probability(tasks[0], 0), InvalidInputError);
}

TEST_CASE("task sets round-trip through JSONL") {
  BenchSpec spec = simple_spec(6, 21);
  spec.difficulty_distribution = {{0.2, 0.5}, {0.8, 0.5}};
  const auto tasks = generate_task_set(spec);

  const std::string path = "test_tasks_roundtrip.jsonl";
  save_task_set_jsonl(tasks, path);
  const auto loaded = load_task_set_jsonl(path);
  std::remove(path.c_str());

  REQUIRE(loaded.size() == tasks.size());
  for (size_t i = 0; i < tasks.size(); ++i) {
    CHECK(loaded[i].id == tasks[i].id);
    CHECK(loaded[i].prompt_tokens == tasks[i].prompt_tokens);
    CHECK(loaded[i].target_answer == tasks[i].target_answer);
    CHECK(loaded[i].difficulty == tasks[i].difficulty);
    REQUIRE(loaded[i].model.has_value());
    // The reconstructed model must behave identically.
    CHECK(loaded[i].model->answer_tokens() == tasks[i].model->answer_tokens());
    CHECK(loaded[i].model->per_sample_success() ==
          doctest::Approx(tasks[i].model->per_sample_success()));
    TokenList ctx = tasks[i].prompt_tokens;
    for (int g = 0; g < 8; ++g) {
      const auto da = tasks[i].model->raw_distribution(ctx);
      const auto db = loaded[i].model->raw_distribution(ctx);
      CHECK(da == db);
      ctx.push_back(da.entries().front().token);
    }
  }
}
