#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genforge/corpus.hpp"
#include "genforge/metrics.hpp"

namespace genforge {

// ---------------------------------------------------------------------------
// Length buckets

/// Five-number summary plus mean and sample std over the defined scores of
/// one bucket. `count` counts records, `defined` counts non-NaN scores; the
/// summary fields are absent when `defined` is 0.
struct BoxStats {
  std::size_t count = 0;
  std::size_t defined = 0;
  std::optional<double> mean, std, min, q1, median, q3, max;
};

struct Bucket {
  /// Left-closed [lo, hi). The overflow bucket has lo = last edge, hi = inf
  /// and also collects lengths below the first edge.
  double lo = 0;
  double hi = 0;
  bool overflow = false;
  BoxStats stats;
};

struct BucketStats {
  std::vector<double> edges;
  /// edges.size() - 1 regular buckets followed by the overflow bucket.
  std::vector<Bucket> buckets;
};

const std::vector<double>& default_bucket_edges();

BoxStats box_stats(std::span<const double> scores);

/// Buckets record i by lengths[i]. Throws ArgumentError when the spans differ
/// in size or the edges are not strictly increasing (at least two).
BucketStats bucket_scores(std::span<const std::size_t> lengths,
                          std::span<const double> scores,
                          std::span<const double> edges = default_bucket_edges());

std::vector<std::size_t> source_lengths(std::span<const Example> examples,
                                        const TokenizerSpec& tokenizer = {});

// ---------------------------------------------------------------------------
// Copy rate

/// Fraction of hypothesis n-gram positions whose n-gram occurs anywhere in
/// the source. Absent when the hypothesis has fewer than n tokens.
std::optional<double> copy_rate(std::span<const std::string> hypothesis,
                                std::span<const std::string> source, std::size_t n);

struct CopyRatePoint {
  std::size_t n = 0;
  /// Mean over records where the rate is defined.
  std::optional<double> mean;
  std::size_t defined = 0;
};

std::vector<CopyRatePoint> copy_rate_curve(std::span<const TokenSeq> hypotheses,
                                           std::span<const TokenSeq> sources,
                                           std::span<const std::size_t> orders = {});

// ---------------------------------------------------------------------------
// Model comparison

/// Per-sample outputs of one model, keyed by record id.
struct ModelRun {
  std::string name;
  std::vector<std::string> ids;
  std::vector<TokenSeq> hypotheses;
  MetricReport report;
};

/// Source and first reference of each record, keyed by id.
struct RecordContext {
  std::string id;
  TokenSeq source;
  TokenSeq reference;
};

struct MetricDelta {
  double corpus_a = 0;
  double corpus_b = 0;
  /// corpus_a - corpus_b.
  double delta = 0;
  /// a - b per record in context order; NaN where either side is undefined.
  std::vector<double> per_sample;
};

struct WinCounts {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t ties = 0;
};

struct Comparison {
  std::string model_a;
  std::string model_b;
  std::string bucket_metric;
  std::map<std::string, MetricDelta> metrics;
  WinCounts overall;
  /// One entry per bucket of the length bucketing, overflow last.
  std::vector<WinCounts> per_bucket;
  std::vector<double> edges;
  std::vector<CopyRatePoint> copy_a, copy_b, copy_reference;
  /// Set when the model's copy rate exceeds the reference's at every order
  /// where both are defined (and at least one is).
  bool copying_a = false;
  bool copying_b = false;
};

/// Aligns both runs to `records` by id. Throws AlignmentError listing the
/// ids missing from either run, and ConfigError when `bucket_metric` has no
/// per-sample scores in both reports.
Comparison compare_models(const ModelRun& a, const ModelRun& b,
                          std::span<const RecordContext> records,
                          const std::string& bucket_metric,
                          std::span<const double> edges = default_bucket_edges());

// ---------------------------------------------------------------------------
// Reports

struct ModelAnalysis {
  std::string name;
  BucketStats buckets;
  std::vector<CopyRatePoint> copy_rates;
};

struct AnalysisResults {
  std::string title = "Generation analysis";
  std::string metric;
  std::vector<ModelAnalysis> models;
  std::vector<CopyRatePoint> reference_copy_rates;
  std::optional<Comparison> comparison;
};

enum class ReportFormat { json, html };
ReportFormat parse_report_format(std::string_view name);

/// JSON: two-space indented, keys sorted, undefined values as null.
/// HTML: one file, inline CSS and SVG, no scripts or external assets.
/// Both are pure functions of `results`.
std::string render_report(const AnalysisResults& results, ReportFormat format);

/// Vertical pixel positions of one boxplot: value v maps to
/// top + height * (1 - (v - lo) / (hi - lo)).
struct BoxplotGeometry {
  double whisker_low = 0, q1 = 0, median = 0, q3 = 0, whisker_high = 0;
};
BoxplotGeometry boxplot_geometry(const BoxStats& stats, double lo, double hi,
                                 double top, double height);

/// Fixed-point "%.2f" formatting used for every SVG coordinate.
std::string format_coord(double value);

// ---------------------------------------------------------------------------
// Leaderboards

struct LeaderboardEntry {
  std::string model;
  std::string dataset;
  std::map<std::string, double> scores;
  /// Citation string or run id.
  std::string source;
  std::optional<std::string> generated_path;

  friend bool operator==(const LeaderboardEntry&, const LeaderboardEntry&) = default;
};

struct Leaderboard {
  std::string dataset;
  /// Score names accepted besides the metric registry (e.g. "inform").
  std::vector<std::string> external_metrics;
  /// Insertion order; upserts keep the original position.
  std::vector<LeaderboardEntry> entries;

  friend bool operator==(const Leaderboard&, const Leaderboard&) = default;
};

std::filesystem::path leaderboard_path(const std::filesystem::path& dir,
                                       const std::string& dataset);

/// A missing file yields an empty board for `dataset`.
Leaderboard leaderboard_load(const std::filesystem::path& file, const std::string& dataset);
/// Writes a sibling temp file and renames it over `file`.
void leaderboard_save(const Leaderboard& board, const std::filesystem::path& file);

/// Upserts by (model, dataset). Throws ValidationError on an empty model
/// name, a dataset other than the board's, or a score name outside the
/// registry and the board's external metrics.
void leaderboard_update(Leaderboard& board, const LeaderboardEntry& entry);

struct LeaderboardRow {
  std::size_t rank = 0;
  const LeaderboardEntry* entry = nullptr;
};

/// Entries by `primary` descending; entries without it follow, then ties
/// break by model name. Throws ConfigError for an unknown primary metric.
std::vector<LeaderboardRow> leaderboard_rank(const Leaderboard& board,
                                             const std::string& primary);

enum class TableFormat { markdown, json };
TableFormat parse_table_format(std::string_view name);

std::string leaderboard_render(const Leaderboard& board, const std::string& primary,
                               TableFormat format = TableFormat::markdown);

}  // namespace genforge
