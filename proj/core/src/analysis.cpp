#include "genforge/analysis.hpp"
#include "genforge/error.hpp"
#include "genforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace genforge {

const std::vector<double>& default_bucket_edges() {
  static const std::vector<double> edges = {0, 256, 512, 768, 1024};
  return edges;
}

BoxStats box_stats(std::span<const double> scores) {
  BoxStats out;
  out.count = scores.size();
  std::vector<double> values;
  for (double s : scores)
    if (!std::isnan(s)) values.push_back(s);
  out.defined = values.size();
  if (values.empty()) return out;
  std::sort(values.begin(), values.end());
  out.mean = mean(values);
  out.std = sample_std(values);
  out.min = values.front();
  out.q1 = quantile_sorted(values, 0.25);
  out.median = quantile_sorted(values, 0.5);
  out.q3 = quantile_sorted(values, 0.75);
  out.max = values.back();
  return out;
}

namespace {

void check_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw ArgumentError("bucket edges need at least two values");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1]))
      throw ArgumentError("bucket edges must be strictly increasing");
}

/// Index of the bucket holding `length`; edges.size() - 1 is the overflow.
std::size_t bucket_index(std::span<const double> edges, std::size_t length) {
  const double x = static_cast<double>(length);
  const std::size_t overflow = edges.size() - 1;
  if (x < edges.front() || x >= edges.back()) return overflow;
  const auto it = std::upper_bound(edges.begin(), edges.end(), x);
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

}  // namespace

BucketStats bucket_scores(std::span<const std::size_t> lengths,
                          std::span<const double> scores,
                          std::span<const double> edges) {
  if (lengths.size() != scores.size())
    throw ArgumentError("bucket_scores: one score per record required");
  check_edges(edges);

  const std::size_t n_buckets = edges.size();
  std::vector<std::vector<double>> members(n_buckets);
  for (std::size_t i = 0; i < lengths.size(); ++i)
    members[bucket_index(edges, lengths[i])].push_back(scores[i]);

  BucketStats out;
  out.edges.assign(edges.begin(), edges.end());
  for (std::size_t b = 0; b < n_buckets; ++b) {
    Bucket bucket;
    bucket.overflow = b + 1 == n_buckets;
    bucket.lo = bucket.overflow ? edges.back() : edges[b];
    bucket.hi = bucket.overflow ? std::numeric_limits<double>::infinity() : edges[b + 1];
    bucket.stats = box_stats(members[b]);
    out.buckets.push_back(std::move(bucket));
  }
  return out;
}

std::vector<std::size_t> source_lengths(std::span<const Example> examples,
                                        const TokenizerSpec& tokenizer) {
  std::vector<std::size_t> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(tokenize(ex.source, tokenizer).size());
  return out;
}

std::optional<double> copy_rate(std::span<const std::string> hypothesis,
                                std::span<const std::string> source, std::size_t n) {
  if (n == 0) throw ArgumentError("copy_rate: n must be >= 1");
  if (hypothesis.size() < n) return std::nullopt;
  std::unordered_set<std::string> present;
  for (std::size_t i = 0; i + n <= source.size(); ++i)
    present.insert(NGramCounts::encode(source.subspan(i, n)));
  std::size_t hits = 0;
  const std::size_t total = hypothesis.size() - n + 1;
  for (std::size_t i = 0; i < total; ++i)
    hits += present.count(NGramCounts::encode(hypothesis.subspan(i, n)));
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<CopyRatePoint> copy_rate_curve(std::span<const TokenSeq> hypotheses,
                                           std::span<const TokenSeq> sources,
                                           std::span<const std::size_t> orders) {
  if (hypotheses.size() != sources.size())
    throw ArgumentError("copy_rate_curve: one source per hypothesis required");
  static const std::vector<std::size_t> kDefaultOrders = {1, 2, 3, 4};
  if (orders.empty()) orders = kDefaultOrders;

  std::vector<CopyRatePoint> out;
  for (std::size_t n : orders) {
    std::vector<double> rates;
    for (std::size_t i = 0; i < hypotheses.size(); ++i)
      if (const auto r = copy_rate(hypotheses[i], sources[i], n)) rates.push_back(*r);
    CopyRatePoint point{n, std::nullopt, rates.size()};
    if (!rates.empty()) point.mean = mean(rates);
    out.push_back(point);
  }
  return out;
}

namespace {

/// Maps each context id to its row in `run`, throwing on any mismatch.
std::vector<std::size_t> align(const ModelRun& run, std::span<const RecordContext> records) {
  if (run.hypotheses.size() != run.ids.size())
    throw ArgumentError("model '" + run.name + "': one hypothesis per id required");
  std::unordered_map<std::string, std::size_t> row;
  for (std::size_t i = 0; i < run.ids.size(); ++i) row.emplace(run.ids[i], i);

  std::vector<std::size_t> out;
  std::vector<std::string> missing;
  std::unordered_set<std::string> wanted;
  for (const auto& rec : records) {
    wanted.insert(rec.id);
    const auto it = row.find(rec.id);
    if (it == row.end()) {
      missing.push_back(rec.id);
      continue;
    }
    out.push_back(it->second);
  }
  std::vector<std::string> extra;
  for (const auto& id : run.ids)
    if (!wanted.count(id)) extra.push_back(id);
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "model '" + run.name + "' does not align with the records";
    const auto list = [&](const char* label, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg += std::string("; ") + label + ":";
      for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg += " " + ids[i];
      if (ids.size() > 20) msg += " (+" + std::to_string(ids.size() - 20) + " more)";
    };
    list("missing ids", missing);
    list("unknown ids", extra);
    throw AlignmentError(msg);
  }
  return out;
}

double per_sample_at(const MetricReport& report, const std::string& metric, std::size_t row) {
  const auto& values = report.per_sample.at(metric);
  return row < values.size() ? values[row] : std::numeric_limits<double>::quiet_NaN();
}

bool copies_more(const std::vector<CopyRatePoint>& model,
                 const std::vector<CopyRatePoint>& reference) {
  bool any = false;
  for (std::size_t i = 0; i < model.size() && i < reference.size(); ++i) {
    if (!model[i].mean || !reference[i].mean) continue;
    if (!(*model[i].mean > *reference[i].mean)) return false;
    any = true;
  }
  return any;
}

}  // namespace

Comparison compare_models(const ModelRun& a, const ModelRun& b,
                          std::span<const RecordContext> records,
                          const std::string& bucket_metric,
                          std::span<const double> edges) {
  check_edges(edges);
  const std::vector<std::size_t> rows_a = align(a, records);
  const std::vector<std::size_t> rows_b = align(b, records);
  if (!a.report.per_sample.count(bucket_metric) || !b.report.per_sample.count(bucket_metric))
    throw ConfigError("metric '" + bucket_metric + "' has no per-sample scores in both reports");

  Comparison out;
  out.model_a = a.name;
  out.model_b = b.name;
  out.bucket_metric = bucket_metric;
  out.edges.assign(edges.begin(), edges.end());
  const std::size_t n = records.size();

  for (const auto& [metric, corpus_a] : a.report.corpus) {
    const auto it = b.report.corpus.find(metric);
    if (it == b.report.corpus.end()) continue;
    MetricDelta d;
    d.corpus_a = corpus_a;
    d.corpus_b = it->second;
    d.delta = corpus_a - it->second;
    if (a.report.per_sample.count(metric) && b.report.per_sample.count(metric)) {
      d.per_sample.reserve(n);
      for (std::size_t i = 0; i < n; ++i)
        d.per_sample.push_back(per_sample_at(a.report, metric, rows_a[i]) -
                               per_sample_at(b.report, metric, rows_b[i]));
    }
    out.metrics.emplace(metric, std::move(d));
  }

  out.per_bucket.assign(edges.size(), WinCounts{});
  for (std::size_t i = 0; i < n; ++i) {
    const double sa = per_sample_at(a.report, bucket_metric, rows_a[i]);
    const double sb = per_sample_at(b.report, bucket_metric, rows_b[i]);
    if (std::isnan(sa) || std::isnan(sb)) continue;
    WinCounts& bucket = out.per_bucket[bucket_index(edges, records[i].source.size())];
    std::size_t WinCounts::*side = sa > sb ? &WinCounts::a : sb > sa ? &WinCounts::b
                                                                    : &WinCounts::ties;
    ++(bucket.*side);
    ++(out.overall.*side);
  }

  std::vector<TokenSeq> sources, references, hyps_a, hyps_b;
  for (std::size_t i = 0; i < n; ++i) {
    sources.push_back(records[i].source);
    references.push_back(records[i].reference);
    hyps_a.push_back(a.hypotheses[rows_a[i]]);
    hyps_b.push_back(b.hypotheses[rows_b[i]]);
  }
  out.copy_a = copy_rate_curve(hyps_a, sources);
  out.copy_b = copy_rate_curve(hyps_b, sources);
  out.copy_reference = copy_rate_curve(references, sources);
  out.copying_a = copies_more(out.copy_a, out.copy_reference);
  out.copying_b = copies_more(out.copy_b, out.copy_reference);
  return out;
}

}  // namespace genforge
