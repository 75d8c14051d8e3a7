#pragma once

// Random scorer tables searched by the library decoders and by the
// exhaustive oracle.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "genforge/decode.hpp"
#include "genforge/ngram_lm.hpp"
#include "genforge/random.hpp"
#include "oracles.hpp"

namespace oracle {

struct TableCase {
  std::size_t vocab_size = 2;
  std::size_t max_len = 1;
  double length_penalty = 1.0;
  std::size_t no_repeat = 0;
  double eos_weight = 1.0;
  std::uint64_t table_seed = 0;
};

/// |V| in 2..4, max_len in 1..5, length penalty in {0, 0.5, 1, 1.5}, blocking
/// off or 2/3, EOS weight in {0.2, 1, 3}.
inline TableCase table_case(std::uint64_t seed) {
  genforge::Rng rng = genforge::make_rng(seed);
  TableCase c;
  c.vocab_size = 2 + genforge::uniform_index(rng, 3);
  c.max_len = 1 + genforge::uniform_index(rng, 5);
  c.length_penalty = 0.5 * static_cast<double>(genforge::uniform_index(rng, 4));
  const std::size_t blocking[] = {0, 2, 3};
  c.no_repeat = blocking[genforge::uniform_index(rng, 3)];
  const double eos[] = {0.2, 1.0, 3.0};
  c.eos_weight = eos[genforge::uniform_index(rng, 3)];
  c.table_seed = rng();
  return c;
}

inline genforge::TableScorer make_table(const TableCase& c) {
  return genforge::TableScorer::random(c.vocab_size, c.table_seed, c.eos_weight);
}

inline LogTable log_table(const genforge::Scorer& scorer) {
  return [&scorer](const std::vector<unsigned>& prefix) {
    genforge::StatePtr state = scorer.begin({});
    for (unsigned t : prefix) state = scorer.extend(state, t);
    const auto dist = scorer.log_dist(*state);
    return std::vector<double>(dist.begin(), dist.end());
  };
}

inline std::vector<unsigned> ids(const std::vector<genforge::TokenId>& tokens) {
  return {tokens.begin(), tokens.end()};
}

}  // namespace oracle
