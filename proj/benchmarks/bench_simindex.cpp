#include <benchmark/benchmark.h>

#include "noveltyrank/simindex.hpp"
#include "noveltyrank/synth.hpp"

using namespace noveltyrank;

namespace {

synth::SynthBundle bundle(std::size_t papers, std::size_t dim) {
  synth::SynthConfig cfg;
  cfg.papers = papers;
  cfg.dim = dim;
  cfg.seed = 17;
  return synth::generate(cfg);
}

void BM_IndexBuild(benchmark::State& state) {
  const auto b = bundle(static_cast<std::size_t>(state.range(0)), 768);
  for (auto _ : state) {
    auto index = simindex::PriorIndex::build(b.corpus, b.proximity);
    benchmark::DoNotOptimize(index.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_PriorQuery(benchmark::State& state) {
  const auto b = bundle(static_cast<std::size_t>(state.range(0)), 768);
  const auto index = simindex::PriorIndex::build(b.corpus, b.proximity);
  const auto& ids = b.corpus.ordering();
  std::size_t i = 0;
  for (auto _ : state) {
    auto hits = index.query(ids[ids.size() - 1 - (i++ % 100)], 10);
    benchmark::DoNotOptimize(hits.entries.data());
  }
}
BENCHMARK(BM_PriorQuery)->Arg(1000)->Arg(5000)->Arg(20000)->Unit(benchmark::kMicrosecond);

}  // namespace
