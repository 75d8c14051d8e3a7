#include <algorithm>

#include "doctest.h"
#include "genforge/error.hpp"
#include "genforge/objectives.hpp"

using namespace genforge;

namespace {

TokenSeq numbered(std::size_t n) {
  TokenSeq out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("t" + std::to_string(i));
  return out;
}

CorruptionSpec spec_for(Objective o, std::uint64_t seed) {
  CorruptionSpec s = CorruptionSpec::defaults(o);
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("objective names and defaults") {
  for (auto o : {Objective::lm, Objective::masked_seq2seq, Objective::denoising,
                 Objective::span_prediction})
    CHECK(parse_objective(to_string(o)) == o);
  CHECK_THROWS_AS(parse_objective("electra"), ConfigError);
  CHECK(CorruptionSpec::defaults(Objective::masked_seq2seq).mask_ratio == 0.5);
  CHECK(CorruptionSpec::defaults(Objective::denoising).mask_ratio == 0.3);
  CHECK(CorruptionSpec::defaults(Objective::denoising).mean_span == 3.0);
  CHECK(CorruptionSpec::defaults(Objective::span_prediction).mask_ratio == 0.15);
  CorruptionSpec bad;
  bad.mask_ratio = 1.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad.mask_ratio = 0.2;
  bad.mean_span = 0.5;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("reserved tokens") {
  CHECK(sentinel_token(0) == "<s0>");
  CHECK(sentinel_token(99) == "<s99>");
  CHECK(sentinel_index("<s42>") == std::optional<std::size_t>(42));
  CHECK_FALSE(sentinel_index("<s100>"));
  CHECK_FALSE(sentinel_index("<s>"));
  CHECK_FALSE(sentinel_index("<s01>"));
  CHECK(is_reserved_token("<mask>"));
  CHECK_FALSE(is_reserved_token("mask"));
  const TokenSeq bad = {"a", "<mask>"};
  CHECK_THROWS_AS(check_no_reserved_tokens(bad), ValidationError);
  CHECK_THROWS_AS(corrupt(bad, spec_for(Objective::span_prediction, 1)), ValidationError);
}

TEST_CASE("lm shift") {
  const TokenSeq t = {"a", "b", "c"};
  const auto p = corrupt_lm(t);
  CHECK(p.input == TokenSeq{"a", "b"});
  CHECK(p.target == TokenSeq{"b", "c"});
  CHECK(reconstruct(p) == t);
  const TokenSeq one = {"a"};
  CHECK_THROWS_AS(corrupt_lm(one), ArgumentError);
}

TEST_CASE("masked seq2seq masks one contiguous span in place") {
  const TokenSeq t = numbered(10);
  const auto p = corrupt_mass(t, spec_for(Objective::masked_seq2seq, 3));
  CHECK(p.input.size() == t.size());
  CHECK(p.target.size() == 5);
  CHECK(std::count(p.input.begin(), p.input.end(), std::string(kMaskToken)) == 5);
  CHECK(reconstruct(p) == t);
  const auto fixed = apply_mass_plan(t, {2, 3});
  CHECK(fixed.target == TokenSeq{"t2", "t3", "t4"});
  CHECK(fixed.input[2] == "<mask>");
  CHECK(fixed.input[5] == "t5");
  CHECK_THROWS_AS(apply_mass_plan(t, {8, 3}), ArgumentError);
}

TEST_CASE("span prediction layout") {
  const TokenSeq t = numbered(8);
  const std::vector<Span> spans = {{1, 2}, {5, 1}};
  const auto p = apply_span_plan(t, spans);
  CHECK(p.input == TokenSeq{"t0", "<s0>", "t3", "t4", "<s1>", "t6", "t7"});
  CHECK(p.target == TokenSeq{"<s0>", "t1", "t2", "<s1>", "t5", "<s2>"});
  CHECK(reconstruct(p) == t);
  const std::vector<Span> adjacent = {{1, 2}, {3, 1}};
  CHECK_THROWS_AS(apply_span_plan(t, adjacent), ArgumentError);
  const std::vector<Span> empty_span = {{1, 0}};
  CHECK_THROWS_AS(apply_span_plan(t, empty_span), ArgumentError);
}

TEST_CASE("span prediction never exceeds the sentinel vocabulary") {
  CorruptionSpec s = spec_for(Objective::span_prediction, 9);
  s.mask_ratio = 0.9;
  s.mean_span = 1.0;
  const TokenSeq t = numbered(400);
  const auto p = corrupt_span(t, s);
  CHECK(p.plan.spans.size() + 1 <= kSentinelCount);
  CHECK(reconstruct(p) == t);
}

TEST_CASE("denoising infills spans with one mask each") {
  const TokenSeq t = numbered(6);
  CorruptionPlan plan;
  plan.spans = {{0, 2}, {3, 0}, {4, 2}};
  const auto p = apply_denoise_plan(t, plan);
  CHECK(p.input == TokenSeq{"<mask>", "t2", "<mask>", "t3", "<mask>"});
  CHECK(p.target == t);
  CHECK(reconstruct(p) == t);
}

TEST_CASE("sentence permutation is undone by the plan") {
  const TokenSeq t = {"A", "b.", "C", "d!", "E", "f?", "tail"};
  const auto sents = split_sentences(t);
  REQUIRE(sents.size() == 4);
  CHECK(sents[0] == Span{0, 2});
  CHECK(sents[3] == Span{6, 1});
  CorruptionSpec s = spec_for(Objective::denoising, 4);
  s.permute_sentences = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    s.seed = seed;
    const auto p = corrupt_denoise(t, s);
    CHECK(reconstruct(p) == t);
  }
  const auto text = corrupt_denoise(std::string_view("One two. Three four."), s);
  CHECK(text.target == TokenSeq{"One", "two.", "Three", "four."});
}

TEST_CASE("span length sampling") {
  Rng rng = make_rng(1);
  for (std::size_t total : {1, 5, 17, 100}) {
    const auto lens = sample_span_lengths(total, 3.0, 1, 10, rng);
    std::size_t sum = 0;
    for (auto l : lens) {
      CHECK(l >= 1);
      CHECK(l <= 10);
      sum += l;
    }
    CHECK(sum == total);
  }
}

TEST_CASE("round trips across objectives and lengths") {
  for (auto o : {Objective::lm, Objective::masked_seq2seq, Objective::denoising,
                 Objective::span_prediction}) {
    for (std::size_t n = 2; n < 40; ++n) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const TokenSeq t = numbered(n);
        const auto p = corrupt(t, spec_for(o, seed));
        CHECK(reconstruct(p) == t);
        CHECK(corrupt(t, spec_for(o, seed)) == p);
      }
    }
  }
}

TEST_CASE("tampered pairs are detected") {
  const TokenSeq t = numbered(12);
  auto p = corrupt(t, spec_for(Objective::span_prediction, 2));
  p.target.pop_back();
  CHECK_THROWS_AS(reconstruct(p), IntegrityError);
  auto q = corrupt(t, spec_for(Objective::masked_seq2seq, 2));
  q.target.push_back("extra");
  CHECK_THROWS_AS(reconstruct(q), IntegrityError);
  auto d = corrupt(t, spec_for(Objective::denoising, 2));
  d.input.push_back("<mask>");
  CHECK_THROWS_AS(reconstruct(d), IntegrityError);
}

TEST_CASE("pair jsonl is one line") {
  const TokenSeq t = numbered(5);
  const std::string line = pair_to_jsonl("r1", corrupt(t, spec_for(Objective::denoising, 1)));
  CHECK(line.find('\n') == std::string::npos);
  CHECK(line.find("\"id\":\"r1\"") != std::string::npos);
  CHECK(line.find("\"plan\"") != std::string::npos);
}
