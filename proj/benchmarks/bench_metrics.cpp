#include <benchmark/benchmark.h>

#include "genforge/metrics.hpp"
#include "genforge/random.hpp"

namespace {

std::vector<genforge::GenerationRecord> synthetic(std::size_t pairs, std::size_t tokens) {
  genforge::Rng rng = genforge::make_rng(31);
  const auto sentence = [&] {
    std::string s;
    for (std::size_t k = 0; k < tokens; ++k)
      s += (k ? " w" : "w") + std::to_string(genforge::uniform_index(rng, 2000));
    return s;
  };
  std::vector<genforge::GenerationRecord> recs(pairs);
  for (std::size_t i = 0; i < pairs; ++i) recs[i] = {std::to_string(i), sentence(), {sentence()}, {}};
  return recs;
}

void BM_EvaluateBleuRouge(benchmark::State& state) {
  const auto recs = synthetic(static_cast<std::size_t>(state.range(0)), 30);
  const std::vector<std::string> names = {"bleu", "rouge-1", "rouge-2", "rouge-l"};
  for (auto _ : state) benchmark::DoNotOptimize(genforge::evaluate(recs, names));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvaluateBleuRouge)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Meteor(benchmark::State& state) {
  const auto recs = synthetic(200, static_cast<std::size_t>(state.range(0)));
  const std::vector<std::string> names = {"meteor"};
  for (auto _ : state) benchmark::DoNotOptimize(genforge::evaluate(recs, names));
}
BENCHMARK(BM_Meteor)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SelfBleu(benchmark::State& state) {
  const auto recs = synthetic(static_cast<std::size_t>(state.range(0)), 30);
  std::vector<genforge::TokenSeq> hyps;
  for (const auto& r : recs) hyps.push_back(genforge::tokenize(r.hypothesis));
  for (auto _ : state) benchmark::DoNotOptimize(genforge::self_bleu(hyps));
}
BENCHMARK(BM_SelfBleu)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
