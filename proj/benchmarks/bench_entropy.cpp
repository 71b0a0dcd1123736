// Microbenchmarks for the per-step hot path: distribution construction,
// top-K entropy and nucleus sampling.

#include <benchmark/benchmark.h>

#include <eager/distribution.hpp>
#include <eager/entropy.hpp>
#include <eager/rng.hpp>
#include <eager/sampling.hpp>

namespace {

eager::TokenDistribution make_dist(int32_t vocab, uint64_t seed) {
  eager::RandomStream rng(seed);
  std::vector<eager::TokenEntry> entries;
  entries.reserve(vocab);
  double sum = 0.0;
  for (int32_t t = 0; t < vocab; ++t) {
    const double w = 0.01 + rng.next_unit();
    entries.push_back({t, w});
    sum += w;
  }
  for (auto& e : entries) e.prob /= sum;
  return eager::TokenDistribution(std::move(entries), vocab);
}

void BM_DistributionConstruct(benchmark::State& state) {
  const int32_t vocab = static_cast<int32_t>(state.range(0));
  eager::RandomStream rng(7);
  std::vector<eager::TokenEntry> entries;
  entries.reserve(vocab);
  double sum = 0.0;
  for (int32_t t = 0; t < vocab; ++t) {
    const double w = 0.01 + rng.next_unit();
    entries.push_back({t, w});
    sum += w;
  }
  for (auto& e : entries) e.prob /= sum;
  for (auto _ : state) {
    auto copy = entries;
    benchmark::DoNotOptimize(
        eager::TokenDistribution(std::move(copy), vocab));
  }
}
BENCHMARK(BM_DistributionConstruct)->Arg(64)->Arg(1024)->Arg(32768);

void BM_TopKEntropy(benchmark::State& state) {
  const auto dist = make_dist(static_cast<int32_t>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eager::top_k_entropy(dist, 20));
  }
}
BENCHMARK(BM_TopKEntropy)->Arg(64)->Arg(1024)->Arg(32768);

void BM_SampleToken(benchmark::State& state) {
  const auto dist = make_dist(static_cast<int32_t>(state.range(0)), 13);
  eager::RandomStream rng(29);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eager::sample_token(dist, 0.95, rng));
  }
}
BENCHMARK(BM_SampleToken)->Arg(64)->Arg(1024)->Arg(32768);

void BM_PeakEntropyMean(benchmark::State& state) {
  eager::RandomStream rng(31);
  eager::EntropyTrace trace;
  for (int i = 0; i < state.range(0); ++i) {
    trace.push_back({i, 3.0 * rng.next_unit()});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(eager::peak_entropy_mean(trace, 99.9));
  }
}
BENCHMARK(BM_PeakEntropyMean)->Arg(256)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
