#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "genforge/error.hpp"
#include "genforge/metrics.hpp"
#include "genforge/random.hpp"
#include "oracles.hpp"

using namespace genforge;

namespace {

constexpr double kTol = 1e-12;

TokenSeq words(std::string_view text) {
  TokenizerSpec spec;
  spec.mode = TokenizerMode::whitespace;
  return tokenize(text, spec);
}

std::vector<TokenSeq> refs(std::initializer_list<std::string_view> texts) {
  std::vector<TokenSeq> out;
  for (auto t : texts) out.push_back(words(t));
  return out;
}

}  // namespace

TEST_CASE("bleu of an exact match is 1") {
  const TokenSeq h = words("the cat sat on the mat");
  CHECK(sentence_bleu(h, refs({"the cat sat on the mat"})) == doctest::Approx(1.0).epsilon(kTol));
}

TEST_CASE("unigram clipping uses the max reference count") {
  BleuConfig cfg;
  cfg.max_n = 1;
  const TokenSeq h = words("the the the the the the the");
  CHECK(sentence_bleu(h, refs({"the cat is on the mat"}), cfg) ==
        doctest::Approx(2.0 / 7.0).epsilon(kTol));
  const BleuStats s = bleu_stats(h, refs({"the cat is on the mat", "there is a cat on the mat"}), 1);
  CHECK(s.matches[0] == 2);
  CHECK(s.totals[0] == 7);
}

TEST_CASE("brevity penalty and closest reference length") {
  BleuConfig cfg;
  cfg.max_n = 2;
  cfg.smoothing = Smoothing::none;
  const TokenSeq h = words("the cat");
  CHECK(sentence_bleu(h, refs({"the cat sat on"}), cfg) ==
        doctest::Approx(std::exp(1.0 - 4.0 / 2.0)).epsilon(kTol));
  // Lengths 1 and 3 are equally close to 2; the shorter wins, so BP = 1.
  const BleuStats s = bleu_stats(h, refs({"the cat sat", "cat"}), 2);
  CHECK(s.ref_length == 1);
}

TEST_CASE("bleu smoothing modes") {
  const TokenSeq h = words("a b c d");
  const auto r = refs({"a x c y"});
  BleuConfig none;
  none.smoothing = Smoothing::none;
  CHECK(sentence_bleu(h, r, none) == 0.0);
  BleuConfig eps;
  // p1 = 2/4, p2 = 0.1/3, p3 = 0.1/2, p4 = 0.1/1.
  const double want = std::exp((std::log(0.5) + std::log(0.1 / 3) + std::log(0.05) + std::log(0.1)) / 4);
  CHECK(sentence_bleu(h, r, eps) == doctest::Approx(want).epsilon(kTol));
  BleuConfig addk;
  addk.smoothing = Smoothing::add_k;
  const double want_k = std::exp((std::log(0.5) + std::log(1.0 / 4) + std::log(1.0 / 3) + std::log(1.0 / 2)) / 4);
  CHECK(sentence_bleu(h, r, addk) == doctest::Approx(want_k).epsilon(kTol));
}

TEST_CASE("short hypotheses use only the orders they have") {
  // Two tokens: orders 3 and 4 have no n-grams and are dropped.
  const TokenSeq h = words("a b");
  CHECK(sentence_bleu(h, refs({"a b"})) == doctest::Approx(1.0).epsilon(kTol));
  CHECK(sentence_bleu(TokenSeq{}, refs({"a b"})) == 0.0);
}

TEST_CASE("bleu config validation and smoothing names") {
  BleuConfig bad;
  bad.max_n = 0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  BleuConfig weights;
  weights.weights = {0.5, 0.4};
  weights.max_n = 2;
  CHECK_THROWS_AS(weights.validate(), ArgumentError);
  CHECK(parse_smoothing("add_k") == Smoothing::add_k);
  for (auto s : {Smoothing::none, Smoothing::epsilon, Smoothing::add_k})
    CHECK(parse_smoothing(to_string(s)) == s);
  CHECK_THROWS_AS(parse_smoothing("floor"), ConfigError);
  std::vector<TokenizedRecord> none;
  CHECK_THROWS_AS(bleu(none), ArgumentError);
}

TEST_CASE("corpus bleu is invariant to record order") {
  Rng rng = make_rng(11);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
  std::vector<TokenizedRecord> recs;
  for (int i = 0; i < 12; ++i) {
    TokenizedRecord r;
    for (std::size_t k = 0, n = 3 + uniform_index(rng, 6); k < n; ++k)
      r.hypothesis.push_back(vocab[uniform_index(rng, vocab.size())]);
    r.references.emplace_back();
    for (std::size_t k = 0, n = 3 + uniform_index(rng, 6); k < n; ++k)
      r.references[0].push_back(vocab[uniform_index(rng, vocab.size())]);
    recs.push_back(r);
  }
  const double forward = bleu(recs).score;
  std::reverse(recs.begin(), recs.end());
  CHECK(bleu(recs).score == forward);
  std::rotate(recs.begin(), recs.begin() + 5, recs.end());
  CHECK(bleu(recs).score == forward);
}

TEST_CASE("clipped matches never exceed reference counts") {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    TokenSeq h, r;
    for (std::size_t k = 0, n = uniform_index(rng, 8); k < n; ++k)
      h.push_back(uniform_index(rng, 2) ? "x" : "y");
    for (std::size_t k = 0, n = 1 + uniform_index(rng, 8); k < n; ++k)
      r.push_back(uniform_index(rng, 2) ? "x" : "y");
    const std::vector<TokenSeq> rs = {r};
    const BleuStats s = bleu_stats(h, rs, 4);
    for (std::size_t n = 1; n <= 4; ++n) {
      CHECK(s.matches[n - 1] <= s.totals[n - 1]);
      CHECK(s.matches[n - 1] <= ngrams(r, n).total());
    }
    // Appending a token can add at most one match per order.
    TokenSeq longer = h;
    longer.push_back("x");
    const BleuStats t = bleu_stats(longer, rs, 4);
    for (std::size_t n = 0; n < 4; ++n) {
      CHECK(t.matches[n] >= s.matches[n]);
      CHECK(t.matches[n] <= s.matches[n] + 1);
    }
  }
}

TEST_CASE("rouge known values") {
  const TokenSeq h = words("police killed the gunman");
  const auto r = refs({"police kill the gunman"});
  const PRF l = rouge_l(h, r);
  CHECK(l.precision == doctest::Approx(0.75).epsilon(kTol));
  CHECK(l.recall == doctest::Approx(0.75).epsilon(kTol));
  CHECK(l.f1 == doctest::Approx(0.75).epsilon(kTol));
  const PRF two = rouge_n(h, r, 2);
  CHECK(two.f1 == doctest::Approx(1.0 / 3.0).epsilon(kTol));
  const PRF one = rouge_n(words("a a b"), refs({"a b b c"}), 1);
  CHECK(one.precision == doctest::Approx(2.0 / 3.0).epsilon(kTol));
  CHECK(one.recall == doctest::Approx(0.5).epsilon(kTol));
  CHECK(rouge_n(TokenSeq{}, r, 1).f1 == 0.0);
}

TEST_CASE("rouge picks the best reference") {
  const TokenSeq h = words("a b c");
  CHECK(rouge_n(h, refs({"x y z", "a b c"}), 1).f1 == doctest::Approx(1.0));
  CHECK(rouge_l(h, refs({"c b a", "a c"})).f1 == doctest::Approx(0.8));
}

TEST_CASE("lcs matches the exhaustive oracle up to length 8") {
  Rng rng = make_rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    TokenSeq a, b;
    for (std::size_t k = 0, n = uniform_index(rng, 9); k < n; ++k)
      a.push_back(std::string(1, static_cast<char>('a' + uniform_index(rng, 3))));
    for (std::size_t k = 0, n = uniform_index(rng, 9); k < n; ++k)
      b.push_back(std::string(1, static_cast<char>('a' + uniform_index(rng, 3))));
    CHECK(lcs_length(a, b) == oracle::lcs(a, b));
    CHECK(lcs_length(a, b) == lcs_length(b, a));
  }
}

TEST_CASE("distinct-n") {
  const std::vector<TokenSeq> h = {words("a b a b")};
  CHECK(distinct_n(h, 1) == doctest::Approx(0.5));
  CHECK(distinct_n(h, 2) == doctest::Approx(2.0 / 3.0));
  const std::vector<TokenSeq> pooled = {words("a b"), words("a b")};
  CHECK(distinct_n(pooled, 2) == doctest::Approx(0.5));
  CHECK_THROWS_AS(distinct_n(h, 5), UndefinedMetricError);
}

TEST_CASE("self-bleu") {
  const std::vector<TokenSeq> same = {words("a b c d"), words("a b c d"), words("a b c d")};
  CHECK(self_bleu(same).score == doctest::Approx(1.0));
  const std::vector<TokenSeq> one = {words("a b")};
  CHECK_THROWS_AS(self_bleu(one), ArgumentError);

  std::vector<TokenSeq> many;
  Rng rng = make_rng(3);
  for (int i = 0; i < 30; ++i) {
    TokenSeq t;
    for (int k = 0; k < 6; ++k) t.push_back(std::string(1, static_cast<char>('a' + uniform_index(rng, 4))));
    many.push_back(t);
  }
  const auto full = self_bleu(many);
  CHECK(full.score == doctest::Approx(oracle::self_bleu(many)).epsilon(1e-9));

  SelfBleuOptions capped;
  capped.sample_cap = 10;
  const auto a = self_bleu(many, capped);
  const auto b = self_bleu(many, capped);
  CHECK(a.score == b.score);
  const auto sampled = std::count_if(a.per_sample.begin(), a.per_sample.end(),
                                     [](const auto& v) { return v.has_value(); });
  CHECK(sampled == 10);
  const auto each = oracle::self_bleu_each(many);
  double sum = 0;
  for (std::size_t i = 0; i < many.size(); ++i) {
    if (!a.per_sample[i]) continue;
    CHECK(*a.per_sample[i] == doctest::Approx(each[i]).epsilon(1e-9));
    sum += each[i];
  }
  CHECK(a.score == doctest::Approx(sum / 10).epsilon(1e-9));
  capped.seed = 2021;
  const auto c = self_bleu(many, capped);
  CHECK(c.per_sample != a.per_sample);
}

TEST_CASE("meteor") {
  CHECK(simple_stem("cats") == "cat");
  CHECK(simple_stem("running") == "run");
  CHECK(simple_stem("dogs") == "dog");
  CHECK(simple_stem("the") == "the");
  for (const char* w : {"cat", "cats", "run", "running", "the", "a", "dog", "ran"})
    CHECK(simple_stem(w) == oracle::stem(w));

  const TokenSeq h = words("the cat sat on the mat");
  // One chunk of six matches: penalty 0.5 * (1/6)^3.
  CHECK(meteor(h, refs({"the cat sat on the mat"})) ==
        doctest::Approx(1.0 - 0.5 / 216.0).epsilon(kTol));
  CHECK(meteor(TokenSeq{}, refs({"a"})) == 0.0);
  CHECK(meteor(words("x"), refs({"y"})) == 0.0);

  const MeteorAlignment a = meteor_align(words("cats run"), words("the cat running"));
  CHECK(a.matches == 2);
  CHECK(a.exact_matches == 0);
  CHECK(a.chunks == 1);
  REQUIRE(a.pairs.size() == 2);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});

  // Exact matches win over stem matches even at the cost of fragmentation.
  const MeteorAlignment b = meteor_align(words("cat cats"), words("cats x cat"));
  CHECK(b.exact_matches == 2);
  CHECK(b.chunks == 2);
}

TEST_CASE("answer normalization and accuracy") {
  CHECK(normalize_answer("The  Cat, sat!", AnswerNormalizer::squad) == "cat sat");
  CHECK(normalize_answer(" A b ", AnswerNormalizer::none) == " A b ");
  const std::vector<std::string> r = {"the cat"};
  CHECK(exact_match("Cat!", r) == 1.0);
  CHECK(exact_match("Cat!", r, AnswerNormalizer::none) == 0.0);
  const std::vector<std::string> r2 = {"the cat", "a big dog"};
  CHECK(token_f1("a big cat", r2) == doctest::Approx(2.0 / 3.0));
  const std::vector<std::string> empty = {"the"};
  CHECK(token_f1("a", empty) == 1.0);
  CHECK(token_f1("cat", empty) == 0.0);
}

TEST_CASE("combiners") {
  CHECK(combined_score(84.88, 74.91, 17.89) == doctest::Approx(97.785).epsilon(1e-12));
  CHECK(harmonic_mean(76.50, 92.90) == doctest::Approx(2 * 76.5 * 92.9 / (76.5 + 92.9)));
  CHECK_THROWS_AS(harmonic_mean(0.0, 5.0), ArgumentError);
  CHECK_THROWS_AS(harmonic_mean(5.0, -1.0), ArgumentError);
  CombinedScoreWeights w;
  w.bleu = 0.0;
  CHECK(combined_score(80, 60, 10, w) == doctest::Approx(70));
}

TEST_CASE("metric lists") {
  CHECK(parse_metric_list("bleu, rouge-l,bleu") == std::vector<std::string>{"bleu", "rouge-l"});
  CHECK_THROWS_AS(parse_metric_list("bleu,bertscore"), ConfigError);
  for (const auto& n : metric_names()) CHECK(is_known_metric(n));
  CHECK_FALSE(is_known_metric("rouge-3"));
}

TEST_CASE("join_records aligns by id in prediction order") {
  const std::vector<Example> ex = {{"a", "src a", {"ref a"}}, {"b", "src b", {"ref b1", "ref b2"}}};
  const std::vector<Prediction> p = {{"b", "hyp b"}, {"a", "hyp a"}};
  const auto recs = join_records(p, ex);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].id == "b");
  CHECK(recs[0].references.size() == 2);
  CHECK(recs[0].source == std::optional<std::string>("src b"));
  const std::vector<Prediction> stray = {{"a", "x"}, {"z", "y"}};
  try {
    join_records(stray, ex);
    FAIL("expected AlignmentError");
  } catch (const AlignmentError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("z") != std::string::npos);
    CHECK(msg.find("b") != std::string::npos);
  }
}

TEST_CASE("evaluate is identical for any worker count") {
  Rng rng = make_rng(17);
  std::vector<GenerationRecord> recs;
  for (int i = 0; i < 40; ++i) {
    GenerationRecord r;
    r.id = std::to_string(i);
    for (int k = 0; k < 8; ++k) r.hypothesis += std::string(1, static_cast<char>('a' + uniform_index(rng, 5))) + " ";
    r.references.emplace_back();
    for (int k = 0; k < 9; ++k) r.references[0] += std::string(1, static_cast<char>('a' + uniform_index(rng, 5))) + " ";
    recs.push_back(r);
  }
  const auto& names = metric_names();
  EvalOptions one;
  EvalOptions four;
  four.workers = 4;
  const MetricReport a = evaluate(recs, names, one);
  const MetricReport b = evaluate(recs, names, four);
  CHECK(report_to_json(a) == report_to_json(b));
  CHECK(a.n == 40);
  for (const auto& [k, v] : a.corpus) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("evaluate marks undefined per-sample values") {
  const std::vector<GenerationRecord> recs = {{"1", "a", {"a"}, {}}, {"2", "a b c", {"a b"}, {}}};
  const std::vector<std::string> names = {"distinct-2", "rouge-l"};
  const MetricReport r = evaluate(recs, names);
  CHECK(std::isnan(r.per_sample.at("distinct-2")[0]));
  CHECK(r.per_sample.at("distinct-2")[1] == 1.0);
  CHECK(report_to_json(r).find("null") != std::string::npos);
  const std::vector<GenerationRecord> short_only = {{"1", "a", {"a"}, {}}};
  CHECK_THROWS_AS(evaluate(short_only, names), UndefinedMetricError);
  const std::vector<GenerationRecord> none;
  CHECK_THROWS_AS(evaluate(none, names), ArgumentError);
}
