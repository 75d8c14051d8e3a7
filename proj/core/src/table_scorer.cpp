#include "genforge/error.hpp"
#include "genforge/ngram_lm.hpp"
#include "genforge/random.hpp"

#include <cmath>
#include <limits>

namespace genforge {
namespace {

struct TableState final : ScorerState {
  std::vector<TokenId> prefix;
  std::vector<double> log_probs;
};

}  // namespace

TableScorer::TableScorer(Vocabulary vocab, Table table)
    : vocab_(std::move(vocab)), table_(std::move(table)) {}

StatePtr TableScorer::make_state(std::vector<TokenId> prefix) const {
  auto state = std::make_shared<TableState>();
  std::vector<double> weights = table_(prefix);
  if (weights.size() != vocab_.size())
    throw ArgumentError("table row size does not match the vocabulary");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0) throw ArgumentError("table weights must be nonnegative");
    total += w;
  }
  if (!(total > 0)) throw ArgumentError("table row has no mass");
  state->log_probs.reserve(weights.size());
  for (double w : weights)
    state->log_probs.push_back(w > 0 ? std::log(w / total)
                                     : -std::numeric_limits<double>::infinity());
  state->prefix = std::move(prefix);
  return state;
}

StatePtr TableScorer::begin(std::span<const std::string>) const { return make_state({}); }

StatePtr TableScorer::extend(const StatePtr& state, TokenId token) const {
  std::vector<TokenId> prefix = static_cast<const TableState&>(*state).prefix;
  prefix.push_back(token);
  return make_state(std::move(prefix));
}

std::span<const double> TableScorer::log_dist(const ScorerState& state) const {
  return static_cast<const TableState&>(state).log_probs;
}

TableScorer TableScorer::random(std::size_t vocab_size, std::uint64_t seed,
                                double eos_weight, std::size_t context_length) {
  if (vocab_size < 2) throw ArgumentError("random table needs at least two tokens");
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i + 1 < vocab_size; ++i) tokens.push_back("w" + std::to_string(i));
  tokens.push_back("</s>");
  const auto eos = static_cast<TokenId>(vocab_size - 1);

  Table table = [vocab_size, seed, eos_weight, context_length,
                 eos](std::span<const TokenId> prefix) {
    const std::size_t take = context_length == 0 ? prefix.size()
                                                 : std::min(context_length, prefix.size());
    std::uint64_t h = mix_seed(seed, take);
    for (std::size_t i = prefix.size() - take; i < prefix.size(); ++i)
      h = mix_seed(h, prefix[i]);
    Rng rng = make_rng(h);
    std::vector<double> w(vocab_size);
    for (auto& x : w) x = -std::log(1.0 - uniform01(rng));
    w[eos] *= eos_weight;
    return w;
  };
  return TableScorer(Vocabulary(std::move(tokens), eos), std::move(table));
}

}  // namespace genforge
