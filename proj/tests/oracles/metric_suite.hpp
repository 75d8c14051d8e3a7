#pragma once

// Random micro-corpora scored by the library and by the oracles.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "genforge/error.hpp"
#include "genforge/metrics.hpp"
#include "genforge/random.hpp"
#include "oracles.hpp"

namespace oracle {

inline constexpr double kMetricTolerance = 1e-9;

struct MicroRecord {
  Tokens hypothesis;
  std::vector<Tokens> references;
};

/// 1-5 records over a random vocabulary of 1-4 words; hypotheses have 0-6
/// tokens, each record 1-3 references of 1-6 tokens.
inline std::vector<MicroRecord> micro_corpus(std::uint64_t seed) {
  static const std::vector<std::string> pool = {"cat", "cats", "run", "running",
                                                "the", "a",    "dog", "ran"};
  genforge::Rng rng = genforge::make_rng(seed);
  const auto pick = [&](std::uint64_t n) { return genforge::uniform_index(rng, n); };
  std::vector<std::string> vocab = pool;
  for (std::size_t i = 0; i < vocab.size(); ++i)
    std::swap(vocab[i], vocab[i + pick(vocab.size() - i)]);
  vocab.resize(1 + pick(4));
  const auto sentence = [&](std::size_t lo, std::size_t hi) {
    Tokens out(lo + pick(hi - lo + 1));
    for (auto& w : out) w = vocab[pick(vocab.size())];
    return out;
  };
  std::vector<MicroRecord> records(1 + pick(5));
  for (auto& r : records) {
    r.hypothesis = sentence(0, 6);
    r.references.resize(1 + pick(3));
    for (auto& ref : r.references) ref = sentence(1, 6);
  }
  return records;
}

inline std::string join(const Tokens& t) {
  std::string out;
  for (const auto& w : t) out += (out.empty() ? "" : " ") + w;
  return out;
}

/// Decorates a sentence with capitals and punctuation for the answer metrics.
inline std::string noisy(const Tokens& t, genforge::Rng& rng) {
  std::string out;
  for (const auto& w : t) {
    std::string word = w;
    if (genforge::uniform_index(rng, 3) == 0) word[0] = static_cast<char>(word[0] - 'a' + 'A');
    if (genforge::uniform_index(rng, 4) == 0) word += genforge::uniform_index(rng, 2) ? "," : ".";
    out += (out.empty() ? "" : (genforge::uniform_index(rng, 2) ? " " : "  ")) + word;
  }
  return out;
}

/// Compares every metric on one corpus; returns a description of each
/// mismatch (empty when all agree).
inline std::vector<std::string> check_micro_corpus(std::uint64_t seed) {
  const auto corpus = micro_corpus(seed);
  std::vector<std::string> errors;
  const auto expect = [&](const std::string& what, double got, double want) {
    const bool both_nan = std::isnan(got) && std::isnan(want);
    if (!both_nan && !(std::fabs(got - want) <= kMetricTolerance)) {
      std::ostringstream os;
      os.precision(17);
      os << "seed " << seed << " " << what << ": library " << got << " oracle " << want;
      errors.push_back(os.str());
    }
  };

  std::vector<Tokens> hyps;
  std::vector<std::vector<Tokens>> refs;
  std::vector<genforge::GenerationRecord> records;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    hyps.push_back(corpus[i].hypothesis);
    refs.push_back(corpus[i].references);
    genforge::GenerationRecord rec;
    rec.id = std::to_string(i);
    rec.hypothesis = join(corpus[i].hypothesis);
    for (const auto& r : corpus[i].references) rec.references.push_back(join(r));
    records.push_back(rec);
  }

  std::vector<std::string> names = {"bleu",    "bleu-1",  "bleu-2",     "bleu-3",
                                    "bleu-4",  "rouge-1", "rouge-2",    "rouge-l",
                                    "meteor",  "em",      "f1"};
  const bool any1 = !std::isnan(distinct(hyps, 1));
  const bool any2 = !std::isnan(distinct(hyps, 2));
  if (any1) names.push_back("distinct-1");
  if (any2) names.push_back("distinct-2");
  if (corpus.size() >= 2) names.push_back("self-bleu");
  const genforge::MetricReport report = genforge::evaluate(records, names);

  for (std::size_t k = 1; k <= 4; ++k) {
    Bleu cfg;
    cfg.max_n = k;
    const std::string name = "bleu-" + std::to_string(k);
    expect(name, report.corpus.at(name), corpus_bleu(hyps, refs, cfg));
    for (std::size_t i = 0; i < hyps.size(); ++i)
      expect(name + "[" + std::to_string(i) + "]", report.per_sample.at(name)[i],
             sentence_bleu(hyps[i], refs[i], cfg));
  }
  expect("bleu", report.corpus.at("bleu"), corpus_bleu(hyps, refs));

  // Other smoothing modes through the direct API.
  for (auto mode : {Bleu::none, Bleu::epsilon, Bleu::add_k}) {
    Bleu cfg;
    cfg.smoothing = mode;
    genforge::BleuConfig lib;
    lib.smoothing = mode == Bleu::none      ? genforge::Smoothing::none
                    : mode == Bleu::epsilon ? genforge::Smoothing::epsilon
                                            : genforge::Smoothing::add_k;
    std::vector<genforge::TokenizedRecord> tok;
    for (std::size_t i = 0; i < hyps.size(); ++i) tok.push_back({hyps[i], refs[i]});
    expect("bleu/smoothing", genforge::bleu(tok, lib).score, corpus_bleu(hyps, refs, cfg));
    for (std::size_t i = 0; i < hyps.size(); ++i)
      expect("sentence_bleu/smoothing", genforge::sentence_bleu(hyps[i], refs[i], lib),
             sentence_bleu(hyps[i], refs[i], cfg));
  }

  const auto mean_of = [&](auto fn) {
    double s = 0;
    for (std::size_t i = 0; i < hyps.size(); ++i) s += fn(i);
    return s / static_cast<double>(hyps.size());
  };
  for (std::size_t n : {1, 2}) {
    const std::string name = "rouge-" + std::to_string(n);
    expect(name, report.corpus.at(name),
           mean_of([&](std::size_t i) { return rouge_n_f1(hyps[i], refs[i], n); }));
  }
  expect("rouge-l", report.corpus.at("rouge-l"),
         mean_of([&](std::size_t i) { return rouge_l_f1(hyps[i], refs[i]); }));
  for (std::size_t i = 0; i < hyps.size(); ++i)
    for (const auto& r : refs[i])
      expect("lcs", static_cast<double>(genforge::lcs_length(hyps[i], r)),
             static_cast<double>(lcs(hyps[i], r)));

  expect("meteor", report.corpus.at("meteor"),
         mean_of([&](std::size_t i) { return meteor(hyps[i], refs[i]); }));

  const auto texts = [&](std::size_t i) {
    std::vector<std::string> out;
    for (const auto& r : refs[i]) out.push_back(join(r));
    return out;
  };
  expect("em", report.corpus.at("em"),
         mean_of([&](std::size_t i) { return exact_match(join(hyps[i]), texts(i)); }));
  expect("f1", report.corpus.at("f1"),
         mean_of([&](std::size_t i) { return token_f1(join(hyps[i]), texts(i)); }));

  // Answer metrics on decorated text, straight through the public API.
  genforge::Rng noise = genforge::make_rng(genforge::mix_seed(seed, 7));
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const std::string h = noisy(hyps[i], noise);
    std::vector<std::string> rs;
    for (const auto& r : refs[i]) rs.push_back(genforge::uniform_index(noise, 2) ? noisy(r, noise) : h);
    expect("em/noisy", genforge::exact_match(h, rs), exact_match(h, rs));
    expect("f1/noisy", genforge::token_f1(h, rs), token_f1(h, rs));
  }

  for (std::size_t n = 1; n <= 4; ++n) {
    const double want = distinct(hyps, n);
    if (std::isnan(want)) {
      bool threw = false;
      try {
        (void)genforge::distinct_n(hyps, n);
      } catch (const genforge::UndefinedMetricError&) {
        threw = true;
      }
      if (!threw) errors.push_back("seed " + std::to_string(seed) + " distinct undefined");
    } else {
      expect("distinct-" + std::to_string(n), genforge::distinct_n(hyps, n), want);
    }
  }
  if (any1) expect("distinct-1/eval", report.corpus.at("distinct-1"), distinct(hyps, 1));
  if (any2) expect("distinct-2/eval", report.corpus.at("distinct-2"), distinct(hyps, 2));

  if (corpus.size() >= 2) {
    expect("self-bleu", report.corpus.at("self-bleu"), self_bleu(hyps));
    const auto each = self_bleu_each(hyps);
    for (std::size_t i = 0; i < hyps.size(); ++i)
      expect("self-bleu[" + std::to_string(i) + "]", report.per_sample.at("self-bleu")[i],
             each[i]);
  }
  return errors;
}

}  // namespace oracle
