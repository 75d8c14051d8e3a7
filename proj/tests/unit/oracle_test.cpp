#include "decode_suite.hpp"
#include "doctest.h"
#include "metric_suite.hpp"

using namespace genforge;

TEST_CASE("metrics agree with the brute-force oracles on micro-corpora") {
  for (std::uint64_t seed = 10'000; seed < 10'300; ++seed) {
    const auto errors = oracle::check_micro_corpus(seed);
    for (const auto& e : errors) FAIL_CHECK(e);
    if (!errors.empty()) break;
  }
}

TEST_CASE("micro-corpora cover the interesting shapes") {
  std::size_t empty_hyp = 0, multi_ref = 0, single_record = 0;
  for (std::uint64_t seed = 10'000; seed < 10'300; ++seed) {
    const auto c = oracle::micro_corpus(seed);
    single_record += c.size() == 1;
    for (const auto& r : c) {
      empty_hyp += r.hypothesis.empty();
      multi_ref += r.references.size() > 1;
      CHECK(r.hypothesis.size() <= 6);
      for (const auto& ref : r.references) {
        CHECK(ref.size() >= 1);
        CHECK(ref.size() <= 6);
      }
    }
  }
  CHECK(empty_hyp > 0);
  CHECK(multi_ref > 0);
  CHECK(single_record > 0);
}

TEST_CASE("exhaustive_argmax agrees with the recursive oracle") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const oracle::TableCase c = oracle::table_case(seed);
    const TableScorer scorer = oracle::make_table(c);
    DecodeParams p;
    p.max_len = c.max_len;
    p.length_penalty = c.length_penalty;
    p.no_repeat_ngram = c.no_repeat;
    const Hypothesis lib = exhaustive_argmax(scorer, {}, p);
    const oracle::SearchOutcome want = oracle::exhaustive(
        oracle::log_table(scorer), scorer.vocabulary().eos(), c.max_len, c.length_penalty,
        c.no_repeat);
    INFO("seed " << seed);
    CHECK(oracle::ids(lib.tokens) == want.tokens);
    CHECK(lib.score == doctest::Approx(want.score).epsilon(1e-12));
  }
}

TEST_CASE("wide beams reach the exhaustive optimum") {
  for (std::uint64_t seed = 500; seed < 600; ++seed) {
    const oracle::TableCase c = oracle::table_case(seed);
    const TableScorer scorer = oracle::make_table(c);
    DecodeParams p;
    p.max_len = c.max_len;
    p.length_penalty = c.length_penalty;
    p.no_repeat_ngram = c.no_repeat;
    p.beam_size = static_cast<std::size_t>(std::pow(c.vocab_size, c.max_len));
    INFO("seed " << seed);
    CHECK(beam_search(scorer, {}, p).front().tokens == exhaustive_argmax(scorer, {}, p).tokens);
  }
}
