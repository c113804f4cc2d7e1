#include <benchmark/benchmark.h>

#include "trajprop/clustering.hpp"
#include "trajprop/config.hpp"
#include "trajprop/forecasters.hpp"
#include "trajprop/soft_dtw.hpp"

using namespace trajprop;

static void BM_SoftDtw(benchmark::State& state) {
  const auto c = synth_corpus(scenario_preset("three-regime", 8, static_cast<std::size_t>(state.range(0))), 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(soft_dtw(c.samples[0], c.samples[1], 1.0));
  state.SetComplexityN(state.range(0) + 8);
}
BENCHMARK(BM_SoftDtw)->RangeMultiplier(2)->Range(8, 64)->Complexity(benchmark::oNSquared);

static void BM_KMeans(benchmark::State& state) {
  const auto pts = corpus_points(synth_corpus(scenario_preset("three-regime"), static_cast<std::size_t>(state.range(0)), 1));
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(pts, 3, {.seed = 1}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KMeans)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

static void BM_ConditionedPropose(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto corpus = synth_corpus(scenario_preset("three-regime"), 200, 1);
  const auto space = kmeans(corpus_points(corpus), k, {.seed = 1});
  ForecasterConfig cfg;
  cfg.kind = ForecasterKind::kGanOurs;
  cfg.epochs = 0;
  GenerativeForecaster g(cfg, k);
  g.train(corpus, &space);
  const auto obs = observed_part(corpus.samples[0]);
  for (auto _ : state) benchmark::DoNotOptimize(g.propose(obs, space, 1, 7));
  state.SetComplexityN(k);
}
BENCHMARK(BM_ConditionedPropose)->DenseRange(2, 8, 2)->Complexity(benchmark::oN);
