#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genforge/corpus.hpp"

namespace genforge {

/// A hypothesis with its references, already tokenized under one
/// TokenizerSpec. References must be nonempty.
struct TokenizedRecord {
  TokenSeq hypothesis;
  std::vector<TokenSeq> references;
};

// ---------------------------------------------------------------------------
// BLEU

enum class Smoothing { none, epsilon, add_k };

/// "none", "epsilon" or "add-k".
Smoothing parse_smoothing(std::string_view name);
std::string_view to_string(Smoothing smoothing);

struct BleuConfig {
  std::size_t max_n = 4;
  Smoothing smoothing = Smoothing::epsilon;
  /// Numerator used in place of a zero match count (epsilon smoothing).
  double epsilon = 0.1;
  /// Added to numerator and denominator of orders >= 2 (add-k smoothing).
  double add_k = 1.0;
  /// Per-order weights; empty means uniform 1/max_n.
  std::vector<double> weights;

  std::vector<double> resolved_weights() const;
  /// Throws ArgumentError unless max_n >= 1 and the weights sum to 1.
  void validate() const;
};

/// Sufficient statistics of (corpus or sentence) BLEU. Index k holds order
/// k + 1.
struct BleuStats {
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::size_t hyp_length = 0;
  /// Sum of closest reference lengths (ties go to the shorter reference).
  std::size_t ref_length = 0;

  explicit BleuStats(std::size_t max_n = 4)
      : matches(max_n, 0), totals(max_n, 0) {}
  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(std::span<const std::string> hypothesis,
                     std::span<const TokenSeq> references, std::size_t max_n);

/// BLEU from accumulated statistics:
///   BP * exp(sum_n w_n log p_n),  p_n = matches_n / totals_n,
///   BP = min(1, exp(1 - r / c)).
/// Orders with no hypothesis n-grams are skipped and the remaining weights
/// renormalized. Returns 0 for an empty hypothesis side, and for any zero
/// p_n when smoothing is none.
double bleu_from_stats(const BleuStats& stats, const BleuConfig& cfg);

struct BleuResult {
  double score = 0.0;
  double brevity_penalty = 0.0;
  std::vector<double> precisions;
  BleuStats stats;
  /// Sentence-level BLEU of every record.
  std::vector<double> per_sample;
};

/// Corpus BLEU (statistics summed over records before combining).
/// Throws ArgumentError on an empty corpus.
BleuResult bleu(std::span<const TokenizedRecord> records,
                const BleuConfig& cfg = {});

double sentence_bleu(std::span<const std::string> hypothesis,
                     std::span<const TokenSeq> references,
                     const BleuConfig& cfg = {});

// ---------------------------------------------------------------------------
// ROUGE

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// N-gram overlap PRF; with several references, the reference giving the
/// highest F1 wins.
PRF rouge_n(std::span<const std::string> hypothesis,
            std::span<const TokenSeq> references, std::size_t n);

/// Longest-common-subsequence PRF, max F1 over references.
PRF rouge_l(std::span<const std::string> hypothesis,
            std::span<const TokenSeq> references);

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b);

// ---------------------------------------------------------------------------
// Diversity

/// Pooled distinct n-grams over total n-grams across all hypotheses.
/// Throws UndefinedMetricError when no hypothesis has n tokens.
double distinct_n(std::span<const TokenSeq> hypotheses, std::size_t n);

struct SelfBleuOptions {
  BleuConfig bleu;
  /// Upper bound on the number of hypotheses scored; 0 disables sampling.
  std::size_t sample_cap = 1000;
  std::uint64_t seed = 2020;
};

struct SelfBleuResult {
  double score = 0.0;
  /// Sentence BLEU of each hypothesis against all others; nullopt for
  /// hypotheses left out by sampling.
  std::vector<std::optional<double>> per_sample;
};

/// Mean sentence BLEU of each (sampled) hypothesis against all the others.
/// Throws ArgumentError with fewer than two hypotheses.
SelfBleuResult self_bleu(std::span<const TokenSeq> hypotheses,
                         const SelfBleuOptions& options = {});

// ---------------------------------------------------------------------------
// METEOR

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t exact_matches = 0;
  std::size_t chunks = 0;
  /// (hypothesis position, reference position), sorted by hypothesis.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

/// Light suffix stripper used by the METEOR stem stage.
std::string simple_stem(std::string_view word);

/// Unigram alignment maximizing exact matches, then total (exact + stem)
/// matches, then minimizing the number of chunks.
MeteorAlignment meteor_align(std::span<const std::string> hypothesis,
                             std::span<const std::string> reference);

double meteor_from_alignment(const MeteorAlignment& alignment,
                             std::size_t hyp_length, std::size_t ref_length,
                             const MeteorParams& params = {});

/// Max over references; 0 when either side is empty or nothing matches.
double meteor(std::span<const std::string> hypothesis,
              std::span<const TokenSeq> references,
              const MeteorParams& params = {});

// ---------------------------------------------------------------------------
// Answer accuracy

enum class AnswerNormalizer { none, squad };

/// squad: lowercase, drop ASCII punctuation and the articles a/an/the,
/// collapse whitespace.
std::string normalize_answer(std::string_view text, AnswerNormalizer normalizer);

double exact_match(std::string_view hypothesis,
                   std::span<const std::string> references,
                   AnswerNormalizer normalizer = AnswerNormalizer::squad);

double token_f1(std::string_view hypothesis,
                std::span<const std::string> references,
                AnswerNormalizer normalizer = AnswerNormalizer::squad);

// ---------------------------------------------------------------------------
// Combiners (operate on scores already scaled by 100)

/// 2ab / (a + b); throws ArgumentError unless both are positive.
double harmonic_mean(double a, double b);

struct CombinedScoreWeights {
  double inform = 0.5;
  double success = 0.5;
  double bleu = 1.0;
};

/// (inform + success) / 2 + bleu with the default weights.
double combined_score(double inform, double success, double bleu,
                      const CombinedScoreWeights& weights = {});

// ---------------------------------------------------------------------------
// Corpus evaluation

struct GenerationRecord {
  std::string id;
  std::string hypothesis;
  std::vector<std::string> references;
  std::optional<std::string> source;
};

/// Pairs predictions with the examples of the same id, in prediction order.
/// Throws AlignmentError listing ids present on one side only.
std::vector<GenerationRecord> join_records(std::span<const Prediction> predictions,
                                           std::span<const Example> examples);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct MetricReport {
  std::size_t n = 0;
  /// Corpus score per metric, in [0, 1].
  std::map<std::string, double> corpus;
  /// One value per record; NaN where the metric is undefined for a record.
  std::map<std::string, std::vector<double>> per_sample;
  /// Filled when the report aggregates several seeds.
  std::map<std::string, MeanStd> across_seeds;
};

struct EvalOptions {
  TokenizerSpec tokenizer;
  BleuConfig bleu;
  MeteorParams meteor;
  AnswerNormalizer normalizer = AnswerNormalizer::squad;
  std::size_t self_bleu_cap = 1000;
  std::uint64_t self_bleu_seed = 2020;
  std::size_t workers = 1;
};

/// Every metric name evaluate() accepts.
const std::vector<std::string>& metric_names();
bool is_known_metric(std::string_view name);

/// Splits "bleu,rouge-l" and checks each name; throws ConfigError naming
/// the valid metrics on an unknown one.
std::vector<std::string> parse_metric_list(std::string_view csv);

/// Tokenizes every record once, builds the shared n-gram caches, then
/// computes all requested metrics. Results are bit-identical for any
/// worker count.
MetricReport evaluate(std::span<const GenerationRecord> records,
                      std::span<const std::string> metrics,
                      const EvalOptions& options = {});

/// `{"corpus": {...}, "n": N, "per_sample": {...}}` with sorted keys; adds
/// "across_seeds" when present.
std::string report_to_json(const MetricReport& report, int indent = 2);

}  // namespace genforge
