// Per-sample ranking cost against cluster count.
#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "trajprop/clustering.hpp"
#include "trajprop/config.hpp"
#include "trajprop/ranking.hpp"

using namespace trajprop;

namespace {

struct Setup {
  Corpus corpus;
  ClusterSpace space;
  NeighborBank bank;
  AnetClassifier anet;
  ProposalSet ps;
};

const Setup& setup_for(int k) {
  static std::map<int, std::unique_ptr<Setup>> cache;
  auto& slot = cache[k];
  if (!slot) {
    slot = std::make_unique<Setup>();
    auto& s = *slot;
    s.corpus = synth_corpus(scenario_preset("three-regime"), 600, 1);
    s.space = kmeans(corpus_points(s.corpus), k, {.seed = 2});
    s.bank = build_bank(s.corpus, s.space, Operand::kFuture);
    std::vector<std::vector<Vec2>> fut;
    for (const auto& x : s.corpus.samples) fut.push_back(future_deltas(x));
    AnetSpec spec;
    spec.epochs = 1;
    s.anet = AnetClassifier::fit(fut, s.space.assignments, k, {}, spec, 3);
    s.ps.observed = observed_part(s.corpus.samples[0]);
    for (int c = 0; c < k; ++c) {
      s.ps.proposals.push_back({future_deltas(s.corpus.samples[s.space.members[static_cast<std::size_t>(c)][0]]), c});
    }
  }
  return *slot;
}

void BM_RankCent(benchmark::State& state) {
  const auto& s = setup_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rank_centroids(s.ps, s.space, 1.0));
  state.SetComplexityN(state.range(0));
}

void BM_RankNeigh(benchmark::State& state) {
  const auto& s = setup_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rank_neighbors(s.ps, s.space, s.bank, 1.0, 20));
  state.SetComplexityN(state.range(0));
}

void BM_RankAnet(benchmark::State& state) {
  const auto& s = setup_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(s.anet.rank(s.ps));
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_RankCent)->DenseRange(2, 10, 2)->Complexity(benchmark::oN);
BENCHMARK(BM_RankNeigh)->DenseRange(2, 10, 2)->Complexity(benchmark::oN);
BENCHMARK(BM_RankAnet)->DenseRange(2, 10, 2)->Complexity(benchmark::oN);
BENCHMARK_MAIN();
