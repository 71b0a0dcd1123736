// End-to-end generation benchmarks over synthetic task models.

#include <benchmark/benchmark.h>

#include <eager/bench.hpp>
#include <eager/engine.hpp>

namespace {

eager::EngineConfig engine_config(int M) {
  eager::EngineConfig config;
  config.theta = 2.0;
  config.M = M;
  config.temperature = 1.0;
  config.top_p = 1.0;
  config.max_steps = 96;
  config.seed = 3;
  return config;
}

eager::PromptTask make_task(double difficulty) {
  eager::BenchSpec spec;
  spec.n_prompts = 1;
  spec.difficulty_distribution = {{difficulty, 1.0}};
  spec.reasoning_length_min = 32;
  spec.reasoning_length_max = 32;
  spec.seed = 17;
  return eager::generate_task_set(spec).front();
}

void BM_GenerateEasy(benchmark::State& state) {
  const auto task = make_task(0.0);
  const auto config = engine_config(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        eager::generate(task, config, *task.model, config.M));
  }
}
BENCHMARK(BM_GenerateEasy)->Arg(4)->Arg(16);

void BM_GenerateHard(benchmark::State& state) {
  const auto task = make_task(0.9);
  const auto config = engine_config(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        eager::generate(task, config, *task.model, config.M));
  }
}
BENCHMARK(BM_GenerateHard)->Arg(4)->Arg(16)->Arg(32);

void BM_MaterializeHard(benchmark::State& state) {
  const auto task = make_task(0.9);
  const auto config = engine_config(32);
  const auto tree = eager::generate(task, config, *task.model, config.M);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eager::materialize_sequences(tree));
  }
}
BENCHMARK(BM_MaterializeHard);

}  // namespace

BENCHMARK_MAIN();
