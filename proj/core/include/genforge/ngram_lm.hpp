#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "genforge/corpus.hpp"
#include "genforge/decode.hpp"

namespace genforge {

struct NgramLmOptions {
  std::size_t order = 3;
  double add_k = 0.01;
  /// Weight of the source-unigram copy distribution in the mixture.
  double copy_lambda = 0.3;
};

/// Add-k smoothed order-n model over target-side tokens, mixed with a copy
/// distribution built from the source:
///   P(w | ctx, src) = lambda * copy(w | src) + (1 - lambda) * P_ngram(w | ctx).
/// Vocabulary layout: `<bos>` (id 0, never predicted), `</s>` (id 1), then
/// the training tokens in sorted order. Contexts are left-padded with BOS.
class NgramLm final : public Scorer {
 public:
  /// Throws FitError when there is nothing to train on and ArgumentError on
  /// bad options.
  static std::shared_ptr<const NgramLm> fit(std::span<const TokenSeq> targets,
                                            const NgramLmOptions& options = {});

  const Vocabulary& vocabulary() const override { return vocab_; }
  StatePtr begin(std::span<const std::string> source) const override;
  StatePtr extend(const StatePtr& state, TokenId token) const override;
  std::span<const double> log_dist(const ScorerState& state) const override;

  /// Smoothed n-gram probability without the copy mixture; `context` holds
  /// the preceding ids (only the last order-1 are used).
  double ngram_prob(std::span<const TokenId> context, TokenId token) const;

  const NgramLmOptions& options() const noexcept { return options_; }

 private:
  struct ContextCounts {
    std::size_t total = 0;
    std::vector<std::pair<TokenId, std::size_t>> next;
  };

  NgramLm(Vocabulary vocab, NgramLmOptions options);

  std::vector<double> distribution(std::span<const TokenId> context,
                                   const std::vector<double>* copy) const;
  const ContextCounts* lookup(std::span<const TokenId> context) const;

  Vocabulary vocab_;
  NgramLmOptions options_;
  std::unordered_map<std::string, ContextCounts> counts_;
};

/// Fits on every reference of `split`, tokenized with `tokenizer`.
std::shared_ptr<const NgramLm> ngram_lm_fit(const Dataset& dataset,
                                            const NgramLmOptions& options = {},
                                            const TokenizerSpec& tokenizer = {},
                                            const std::string& split = "train");

/// Scorer defined by an arbitrary function of the generated prefix. Useful
/// for hand-built tables (point masses, uniform) and random test tables.
class TableScorer final : public Scorer {
 public:
  /// Returns next-token probabilities (need not be normalized; zeros map to
  /// -inf) for a generated prefix.
  using Table = std::function<std::vector<double>(std::span<const TokenId>)>;

  TableScorer(Vocabulary vocab, Table table);

  /// Vocabulary `w0 ... w{n-2} </s>` with prefix-dependent Dirichlet(1)
  /// rows derived from `seed`. `eos_weight` scales the EOS entry before
  /// normalization; `context_length` limits how much of the prefix a row
  /// depends on (0 = all of it).
  static TableScorer random(std::size_t vocab_size, std::uint64_t seed,
                            double eos_weight = 1.0, std::size_t context_length = 0);

  const Vocabulary& vocabulary() const override { return vocab_; }
  StatePtr begin(std::span<const std::string> source) const override;
  StatePtr extend(const StatePtr& state, TokenId token) const override;
  std::span<const double> log_dist(const ScorerState& state) const override;

 private:
  StatePtr make_state(std::vector<TokenId> prefix) const;

  Vocabulary vocab_;
  Table table_;
};

}  // namespace genforge
