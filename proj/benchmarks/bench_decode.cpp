#include <benchmark/benchmark.h>

#include "genforge/ngram_lm.hpp"
#include "genforge/random.hpp"

namespace {

std::shared_ptr<const genforge::NgramLm> toy_lm() {
  genforge::Rng rng = genforge::make_rng(5);
  std::vector<genforge::TokenSeq> data(500);
  for (auto& seq : data)
    for (int k = 0; k < 30; ++k) seq.push_back("w" + std::to_string(genforge::uniform_index(rng, 300)));
  return genforge::NgramLm::fit(data);
}

void BM_IncrementalExtend(benchmark::State& state) {
  const auto lm = toy_lm();
  std::vector<genforge::TokenId> prefix(static_cast<std::size_t>(state.range(0)), 5);
  const auto s = lm->score_prefix({}, prefix).state;
  for (auto _ : state) benchmark::DoNotOptimize(lm->extend(s, 7));
}
BENCHMARK(BM_IncrementalExtend)->Arg(64);

void BM_PrefixRescore(benchmark::State& state) {
  const auto lm = toy_lm();
  std::vector<genforge::TokenId> prefix(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(lm->score_prefix({}, prefix));
}
BENCHMARK(BM_PrefixRescore)->Arg(64);

void BM_BeamSearch(benchmark::State& state) {
  const auto lm = toy_lm();
  genforge::DecodeParams p;
  p.beam_size = static_cast<std::size_t>(state.range(0));
  p.max_len = 32;
  for (auto _ : state) benchmark::DoNotOptimize(genforge::beam_search(*lm, {}, p));
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
