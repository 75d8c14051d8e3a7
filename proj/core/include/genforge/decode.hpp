#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "genforge/random.hpp"

namespace genforge {

using TokenId = std::uint32_t;

/// Ordered token list. EOS is mandatory; BOS is optional and is never
/// generated by the decoders.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, TokenId eos,
             std::optional<TokenId> bos = std::nullopt);

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::optional<TokenId> find(std::string_view token) const;
  TokenId eos() const noexcept { return eos_; }
  std::optional<TokenId> bos() const noexcept { return bos_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId eos_;
  std::optional<TokenId> bos_;
};

/// Opaque, immutable decoder state. Extending never mutates a state, so a
/// state may be shared by any number of hypotheses.
class ScorerState {
 public:
  virtual ~ScorerState() = default;
};
using StatePtr = std::shared_ptr<const ScorerState>;

/// Incremental conditional next-token model.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual const Vocabulary& vocabulary() const = 0;
  virtual StatePtr begin(std::span<const std::string> source) const = 0;
  virtual StatePtr extend(const StatePtr& state, TokenId token) const = 0;
  /// Next-token log-probabilities (entries may be -inf); the span lives as
  /// long as the state.
  virtual std::span<const double> log_dist(const ScorerState& state) const = 0;

  struct PrefixScore {
    StatePtr state;
    double log_prob = 0.0;
  };
  /// Scores `prefix` from scratch: begin() followed by one extend() per
  /// token, summing the log-probabilities. This is the non-incremental
  /// route decoders avoid by carrying states forward.
  PrefixScore score_prefix(std::span<const std::string> source,
                           std::span<const TokenId> prefix) const;
};

enum class Strategy { greedy, beam, top_k, top_p };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);

struct DecodeParams {
  Strategy strategy = Strategy::beam;
  std::size_t beam_size = 5;
  /// Maximum number of generated tokens, EOS included.
  std::size_t max_len = 64;
  /// 0 disables blocking.
  std::size_t no_repeat_ngram = 3;
  /// Hypotheses are ranked by log_prob / length^length_penalty.
  double length_penalty = 1.0;
  /// Also forbid n-grams that occur in the source.
  bool block_source_ngrams = false;
  std::size_t top_k = 50;
  double top_p = 0.9;
  double temperature = 1.0;
  std::uint64_t seed = 2020;

  void validate() const;
};

struct Hypothesis {
  /// Generated ids; ends with EOS when the hypothesis stopped on EOS.
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  double score = 0.0;
  bool finished = false;

  /// Generated words without EOS.
  std::vector<std::string> words(const Vocabulary& vocab) const;
  std::string text(const Vocabulary& vocab) const;
};

double normalized_score(double log_prob, std::size_t length, double length_penalty);

/// Tokens t such that the last n-1 tokens of `prefix` followed by t already
/// occur as an n-gram in `prefix`. Empty when the prefix is shorter than n-1.
std::set<std::string> ngram_blocklist(std::span<const std::string> prefix,
                                      std::size_t n);
std::vector<TokenId> ngram_blocklist(std::span<const TokenId> prefix, std::size_t n);

/// Argmax decoding after blocking; ties go to the lowest vocabulary index.
/// If every token is blocked, EOS is emitted.
Hypothesis greedy(const Scorer& scorer, std::span<const std::string> source,
                  const DecodeParams& params);

/// Beam search returning up to beam_size hypotheses ranked by normalized
/// score. The first entry is flagged unfinished if nothing finished.
std::vector<Hypothesis> beam_search(const Scorer& scorer,
                                    std::span<const std::string> source,
                                    const DecodeParams& params);

/// Draws one token from the temperature-scaled distribution truncated to
/// the top-k tokens or the smallest nucleus of mass >= top_p. `blocked`
/// may be empty.
TokenId sample_token(std::span<const double> log_dist,
                     const std::vector<bool>& blocked, const Vocabulary& vocab,
                     const DecodeParams& params, Rng& rng);

/// Ancestral sampling with params.strategy top_k or top_p.
Hypothesis sample(const Scorer& scorer, std::span<const std::string> source,
                  const DecodeParams& params);

/// Enumerates every sequence up to max_len (honouring blocking) and returns
/// the best by normalized score, ties broken by lexicographically smallest
/// ids. Throws SizeError when |V|^max_len exceeds 10^6.
Hypothesis exhaustive_argmax(const Scorer& scorer,
                             std::span<const std::string> source,
                             const DecodeParams& params);

/// Best hypothesis under params.strategy.
Hypothesis decode(const Scorer& scorer, std::span<const std::string> source,
                  const DecodeParams& params);

/// Decodes independent sources on up to `workers` threads; output order
/// equals input order. Sampling strategies seed record i with
/// mix_seed(params.seed, i).
std::vector<Hypothesis> decode_batch(const Scorer& scorer,
                                     std::span<const std::vector<std::string>> sources,
                                     const DecodeParams& params, std::size_t workers);

}  // namespace genforge
