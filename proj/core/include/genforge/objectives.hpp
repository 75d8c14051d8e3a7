#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genforge/corpus.hpp"
#include "genforge/random.hpp"

namespace genforge {

enum class Objective { lm, masked_seq2seq, denoising, span_prediction };

Objective parse_objective(std::string_view name);
std::string_view to_string(Objective objective);

inline constexpr std::string_view kMaskToken = "<mask>";
/// Sentinels are `<s0>` ... `<s99>`.
inline constexpr std::size_t kSentinelCount = 100;

std::string sentinel_token(std::size_t index);
std::optional<std::size_t> sentinel_index(std::string_view token);
bool is_reserved_token(std::string_view token);
/// Throws ValidationError if any token is `<mask>` or a sentinel.
void check_no_reserved_tokens(std::span<const std::string> tokens);

struct CorruptionSpec {
  Objective objective = Objective::span_prediction;
  double mask_ratio = 0.15;
  double mean_span = 3.0;
  /// Denoising only.
  bool permute_sentences = false;
  std::uint64_t seed = 0;

  /// 0.5 for masked-seq2seq, 0.3/3 for denoising, 0.15/3 for span prediction.
  static CorruptionSpec defaults(Objective objective);
  void validate() const;
};

struct Span {
  std::size_t start = 0;
  std::size_t length = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

/// Everything needed to undo a corruption.
struct CorruptionPlan {
  Objective objective = Objective::lm;
  /// Masked spans in ascending start order. For denoising the positions
  /// refer to the sentence-permuted sequence and may have length 0.
  std::vector<Span> spans;
  /// Denoising: sentence extents in the original sequence.
  std::vector<Span> sentences;
  /// Denoising: permuted slot k holds original sentence sentence_order[k].
  std::vector<std::size_t> sentence_order;

  friend bool operator==(const CorruptionPlan&, const CorruptionPlan&) = default;
};

struct CorruptionPair {
  TokenSeq input;
  TokenSeq target;
  CorruptionPlan plan;

  friend bool operator==(const CorruptionPair&, const CorruptionPair&) = default;
};

/// Next-token shift. Throws ArgumentError below two tokens.
CorruptionPair corrupt_lm(std::span<const std::string> tokens);

/// One contiguous span of round(mask_ratio * len) tokens (at least one) is
/// replaced by `<mask>` tokens in place; the target is the span.
CorruptionPair corrupt_mass(std::span<const std::string> tokens,
                            const CorruptionSpec& spec);
CorruptionPair apply_mass_plan(std::span<const std::string> tokens, Span span);

/// Text infilling with optional sentence permutation. Each span (including
/// zero-length ones) becomes a single `<mask>`; the target is the original.
CorruptionPair corrupt_denoise(std::span<const std::string> tokens,
                               const CorruptionSpec& spec);
/// Tokenizes on whitespace (case preserved) before corrupting.
CorruptionPair corrupt_denoise(std::string_view text, const CorruptionSpec& spec);
CorruptionPair apply_denoise_plan(std::span<const std::string> tokens,
                                  const CorruptionPlan& plan);

/// Non-adjacent spans replaced by sentinels; the target lists each sentinel
/// followed by its span and ends with a terminal sentinel.
CorruptionPair corrupt_span(std::span<const std::string> tokens,
                            const CorruptionSpec& spec);
CorruptionPair apply_span_plan(std::span<const std::string> tokens,
                               std::span<const Span> spans);

/// Dispatches on spec.objective.
CorruptionPair corrupt(std::span<const std::string> tokens,
                       const CorruptionSpec& spec);

/// Recovers the original sequence; throws IntegrityError when input, target
/// and plan are inconsistent.
TokenSeq reconstruct(const CorruptionPair& pair);

/// Sentences end at tokens whose last character is '.', '!' or '?'; a
/// trailing fragment forms its own sentence.
std::vector<Span> split_sentences(std::span<const std::string> tokens);

/// Span lengths from a Poisson(mean) truncated to [min_len, max_len], drawn
/// until they cover `total` tokens; the last one is shrunk to fit exactly.
std::vector<std::size_t> sample_span_lengths(std::size_t total, double mean,
                                             std::size_t min_len,
                                             std::size_t max_len, Rng& rng);

/// `{"id":..., "input":[...], "target":[...], "plan":{...}}` on one line.
std::string pair_to_jsonl(std::string_view id, const CorruptionPair& pair);

}  // namespace genforge
