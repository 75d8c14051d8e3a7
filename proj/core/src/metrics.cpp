#include "genforge/metrics.hpp"
#include "genforge/error.hpp"
#include "genforge/parallel.hpp"
#include "genforge/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace genforge {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// N-gram multisets of one token sequence for orders 1..max_order.
struct NgramCache {
  std::vector<NGramCounts> by_order;
  std::size_t length = 0;

  NgramCache(std::span<const std::string> tokens, std::size_t max_order)
      : length(tokens.size()) {
    by_order.reserve(max_order);
    for (std::size_t n = 1; n <= max_order; ++n)
      by_order.push_back(ngrams(tokens, n));
  }

  const NGramCounts& order(std::size_t n) const { return by_order[n - 1]; }
};

std::size_t closest_ref_length(std::size_t hyp_len,
                               std::span<const std::size_t> ref_lens) {
  std::size_t best = ref_lens.front();
  for (std::size_t len : ref_lens) {
    const auto diff = [&](std::size_t r) {
      return r > hyp_len ? r - hyp_len : hyp_len - r;
    };
    if (diff(len) < diff(best) || (diff(len) == diff(best) && len < best))
      best = len;
  }
  return best;
}

BleuStats stats_from_caches(const NgramCache& hyp,
                            std::span<const NgramCache> refs,
                            std::size_t max_n) {
  BleuStats stats(max_n);
  for (std::size_t n = 1; n <= max_n; ++n) {
    const NGramCounts& h = hyp.order(n);
    std::size_t matched = 0;
    for (const auto& [key, count] : h.raw()) {
      std::size_t clip = 0;
      for (const auto& ref : refs) {
        const auto& rc = ref.order(n).raw();
        const auto it = rc.find(key);
        if (it != rc.end()) clip = std::max(clip, it->second);
      }
      matched += std::min(count, clip);
    }
    stats.matches[n - 1] = matched;
    stats.totals[n - 1] = h.total();
  }
  std::vector<std::size_t> lens;
  lens.reserve(refs.size());
  for (const auto& ref : refs) lens.push_back(ref.length);
  stats.hyp_length = hyp.length;
  stats.ref_length = closest_ref_length(hyp.length, lens);
  return stats;
}

BleuStats truncate_stats(const BleuStats& stats, std::size_t max_n) {
  BleuStats out(max_n);
  std::copy_n(stats.matches.begin(), max_n, out.matches.begin());
  std::copy_n(stats.totals.begin(), max_n, out.totals.begin());
  out.hyp_length = stats.hyp_length;
  out.ref_length = stats.ref_length;
  return out;
}

PRF make_prf(double overlap, double hyp_total, double ref_total) {
  PRF prf;
  prf.precision = hyp_total > 0 ? overlap / hyp_total : 0.0;
  prf.recall = ref_total > 0 ? overlap / ref_total : 0.0;
  const double denom = prf.precision + prf.recall;
  prf.f1 = denom > 0 ? 2.0 * prf.precision * prf.recall / denom : 0.0;
  return prf;
}

PRF rouge_from_counts(const NGramCounts& hyp, const NGramCounts& ref) {
  std::size_t overlap = 0;
  const auto& small = hyp.size() <= ref.size() ? hyp.raw() : ref.raw();
  const auto& large = hyp.size() <= ref.size() ? ref.raw() : hyp.raw();
  for (const auto& [key, count] : small) {
    const auto it = large.find(key);
    if (it != large.end()) overlap += std::min(count, it->second);
  }
  return make_prf(static_cast<double>(overlap),
                  static_cast<double>(hyp.total()),
                  static_cast<double>(ref.total()));
}

PRF best_f1(std::span<const PRF> candidates) {
  PRF best = candidates.front();
  for (const auto& c : candidates)
    if (c.f1 > best.f1) best = c;
  return best;
}

PRF lcs_prf(std::span<const std::string> hyp, std::span<const std::string> ref) {
  const double lcs = static_cast<double>(lcs_length(hyp, ref));
  return make_prf(lcs, static_cast<double>(hyp.size()),
                  static_cast<double>(ref.size()));
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

/// Sum in ascending order so corpus means do not depend on record order.
double order_free_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double in_order_mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// BLEU

std::vector<double> BleuConfig::resolved_weights() const {
  if (!weights.empty()) return weights;
  return std::vector<double>(max_n, 1.0 / static_cast<double>(max_n));
}

void BleuConfig::validate() const {
  if (max_n == 0) throw ArgumentError("BLEU max_n must be >= 1");
  if (!weights.empty()) {
    if (weights.size() != max_n)
      throw ArgumentError("BLEU weights must have max_n entries");
    double sum = 0.0;
    for (double w : weights) {
      if (w < 0) throw ArgumentError("BLEU weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw ArgumentError("BLEU weights must sum to 1");
  }
  if (smoothing == Smoothing::epsilon && !(epsilon > 0))
    throw ArgumentError("BLEU epsilon must be positive");
  if (smoothing == Smoothing::add_k && !(add_k > 0))
    throw ArgumentError("BLEU add-k must be positive");
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t k = 0; k < matches.size(); ++k) {
    matches[k] += other.matches[k];
    totals[k] += other.totals[k];
  }
  hyp_length += other.hyp_length;
  ref_length += other.ref_length;
  return *this;
}

BleuStats bleu_stats(std::span<const std::string> hypothesis,
                     std::span<const TokenSeq> references, std::size_t max_n) {
  if (references.empty()) throw ArgumentError("record has no references");
  NgramCache hyp(hypothesis, max_n);
  std::vector<NgramCache> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.emplace_back(r, max_n);
  return stats_from_caches(hyp, refs, max_n);
}

double bleu_from_stats(const BleuStats& stats, const BleuConfig& cfg) {
  if (stats.hyp_length == 0) return 0.0;
  const std::vector<double> w = cfg.resolved_weights();
  const std::size_t orders = std::min(w.size(), stats.totals.size());

  double active_weight = 0.0;
  for (std::size_t k = 0; k < orders; ++k)
    if (w[k] > 0 && stats.totals[k] > 0) active_weight += w[k];
  if (active_weight <= 0) return 0.0;

  double log_sum = 0.0;
  for (std::size_t k = 0; k < orders; ++k) {
    if (!(w[k] > 0) || stats.totals[k] == 0) continue;
    const auto m = static_cast<double>(stats.matches[k]);
    const auto t = static_cast<double>(stats.totals[k]);
    double p = 0.0;
    if (cfg.smoothing == Smoothing::add_k && k >= 1) {
      p = (m + cfg.add_k) / (t + cfg.add_k);
    } else if (m > 0) {
      p = m / t;
    } else if (cfg.smoothing == Smoothing::epsilon) {
      p = cfg.epsilon / t;
    } else {
      return 0.0;
    }
    log_sum += (w[k] / active_weight) * std::log(p);
  }
  const auto c = static_cast<double>(stats.hyp_length);
  const auto r = static_cast<double>(stats.ref_length);
  const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum);
}

BleuResult bleu(std::span<const TokenizedRecord> records, const BleuConfig& cfg) {
  cfg.validate();
  if (records.empty()) throw ArgumentError("BLEU of an empty corpus");
  BleuResult result;
  result.stats = BleuStats(cfg.max_n);
  result.per_sample.reserve(records.size());
  for (const auto& rec : records) {
    const BleuStats s = bleu_stats(rec.hypothesis, rec.references, cfg.max_n);
    result.per_sample.push_back(bleu_from_stats(s, cfg));
    result.stats += s;
  }
  result.score = bleu_from_stats(result.stats, cfg);
  const auto c = static_cast<double>(result.stats.hyp_length);
  const auto r = static_cast<double>(result.stats.ref_length);
  result.brevity_penalty = c == 0 ? 0.0 : (c >= r ? 1.0 : std::exp(1.0 - r / c));
  for (std::size_t k = 0; k < cfg.max_n; ++k)
    result.precisions.push_back(
        result.stats.totals[k] == 0
            ? 0.0
            : static_cast<double>(result.stats.matches[k]) /
                  static_cast<double>(result.stats.totals[k]));
  return result;
}

double sentence_bleu(std::span<const std::string> hypothesis,
                     std::span<const TokenSeq> references,
                     const BleuConfig& cfg) {
  cfg.validate();
  return bleu_from_stats(bleu_stats(hypothesis, references, cfg.max_n), cfg);
}

// ---------------------------------------------------------------------------
// ROUGE

PRF rouge_n(std::span<const std::string> hypothesis,
            std::span<const TokenSeq> references, std::size_t n) {
  if (n == 0) throw ArgumentError("ROUGE-N order must be >= 1");
  if (references.empty()) throw ArgumentError("record has no references");
  const NGramCounts hyp = ngrams(hypothesis, n);
  std::vector<PRF> scores;
  for (const auto& ref : references)
    scores.push_back(rouge_from_counts(hyp, ngrams(ref, n)));
  return best_f1(scores);
}

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PRF rouge_l(std::span<const std::string> hypothesis,
            std::span<const TokenSeq> references) {
  if (references.empty()) throw ArgumentError("record has no references");
  std::vector<PRF> scores;
  for (const auto& ref : references) scores.push_back(lcs_prf(hypothesis, ref));
  return best_f1(scores);
}

// ---------------------------------------------------------------------------
// Diversity

double distinct_n(std::span<const TokenSeq> hypotheses, std::size_t n) {
  if (n == 0) throw ArgumentError("distinct-n order must be >= 1");
  std::unordered_set<std::string> distinct;
  std::size_t total = 0;
  for (const auto& hyp : hypotheses) {
    const NGramCounts counts = ngrams(hyp, n);
    total += counts.total();
    for (const auto& [key, count] : counts.raw()) distinct.insert(key);
  }
  if (total == 0)
    throw UndefinedMetricError("distinct-" + std::to_string(n) +
                               " is undefined: no hypothesis has " +
                               std::to_string(n) + " tokens");
  return static_cast<double>(distinct.size()) / static_cast<double>(total);
}

SelfBleuResult self_bleu(std::span<const TokenSeq> hypotheses,
                         const SelfBleuOptions& options) {
  const BleuConfig& cfg = options.bleu;
  cfg.validate();
  const std::size_t count = hypotheses.size();
  if (count < 2) throw ArgumentError("self-BLEU needs at least two hypotheses");

  std::vector<std::size_t> chosen(count);
  std::iota(chosen.begin(), chosen.end(), 0);
  if (options.sample_cap > 0 && count > options.sample_cap) {
    Rng rng = make_rng(options.seed);
    for (std::size_t i = 0; i < options.sample_cap; ++i) {
      const std::size_t j = i + uniform_index(rng, count - i);
      std::swap(chosen[i], chosen[j]);
    }
    chosen.resize(options.sample_cap);
    std::sort(chosen.begin(), chosen.end());
  }

  std::vector<NgramCache> caches;
  caches.reserve(count);
  for (const auto& h : hypotheses) caches.emplace_back(h, cfg.max_n);

  // For each n-gram, the two largest per-hypothesis counts: the clip against
  // "all other hypotheses" is the top count unless hypothesis i owns it.
  struct TopTwo {
    std::size_t first = 0;
    std::size_t owner = SIZE_MAX;
    std::size_t second = 0;
  };
  std::vector<std::unordered_map<std::string, TopTwo>> tops(cfg.max_n);
  for (std::size_t n = 1; n <= cfg.max_n; ++n) {
    auto& table = tops[n - 1];
    for (std::size_t i = 0; i < count; ++i) {
      for (const auto& [key, c] : caches[i].order(n).raw()) {
        TopTwo& t = table[key];
        if (c > t.first) {
          t.second = t.first;
          t.first = c;
          t.owner = i;
        } else if (c > t.second) {
          t.second = c;
        }
      }
    }
  }

  std::vector<std::size_t> sorted_lengths;
  sorted_lengths.reserve(count);
  for (const auto& h : hypotheses) sorted_lengths.push_back(h.size());
  std::sort(sorted_lengths.begin(), sorted_lengths.end());

  const auto closest_other_length = [&](std::size_t len) {
    const auto [lo, hi] =
        std::equal_range(sorted_lengths.begin(), sorted_lengths.end(), len);
    if (hi - lo >= 2) return len;
    std::optional<std::size_t> below;
    std::optional<std::size_t> above;
    if (lo != sorted_lengths.begin()) below = *(lo - 1);
    if (hi != sorted_lengths.end()) above = *hi;
    if (!below) return *above;
    if (!above) return *below;
    return (len - *below) <= (*above - len) ? *below : *above;
  };

  SelfBleuResult result;
  result.per_sample.assign(count, std::nullopt);
  std::vector<double> scores;
  scores.reserve(chosen.size());
  for (std::size_t i : chosen) {
    BleuStats stats(cfg.max_n);
    for (std::size_t n = 1; n <= cfg.max_n; ++n) {
      const auto& table = tops[n - 1];
      std::size_t matched = 0;
      for (const auto& [key, c] : caches[i].order(n).raw()) {
        const TopTwo& t = table.at(key);
        const std::size_t clip = t.owner == i ? t.second : t.first;
        matched += std::min(c, clip);
      }
      stats.matches[n - 1] = matched;
      stats.totals[n - 1] = caches[i].order(n).total();
    }
    stats.hyp_length = hypotheses[i].size();
    stats.ref_length = closest_other_length(hypotheses[i].size());
    const double s = bleu_from_stats(stats, cfg);
    result.per_sample[i] = s;
    scores.push_back(s);
  }
  result.score = order_free_mean(std::move(scores));
  return result;
}

// ---------------------------------------------------------------------------
// Answer accuracy

std::string normalize_answer(std::string_view text, AnswerNormalizer normalizer) {
  if (normalizer == AnswerNormalizer::none) return std::string(text);
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::ispunct(c)) continue;
    cleaned.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  std::string out;
  for (const auto& word : split_whitespace(cleaned)) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

double exact_match(std::string_view hypothesis,
                   std::span<const std::string> references,
                   AnswerNormalizer normalizer) {
  const std::string hyp = normalize_answer(hypothesis, normalizer);
  for (const auto& ref : references)
    if (normalize_answer(ref, normalizer) == hyp) return 1.0;
  return 0.0;
}

double token_f1(std::string_view hypothesis,
                std::span<const std::string> references,
                AnswerNormalizer normalizer) {
  const auto hyp_tokens = split_whitespace(normalize_answer(hypothesis, normalizer));
  double best = 0.0;
  for (const auto& ref : references) {
    const auto ref_tokens = split_whitespace(normalize_answer(ref, normalizer));
    double f1 = 0.0;
    if (hyp_tokens.empty() || ref_tokens.empty()) {
      f1 = hyp_tokens.empty() && ref_tokens.empty() ? 1.0 : 0.0;
    } else {
      const PRF prf = rouge_from_counts(ngrams(hyp_tokens, 1), ngrams(ref_tokens, 1));
      f1 = prf.f1;
    }
    best = std::max(best, f1);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Combiners

double harmonic_mean(double a, double b) {
  if (!(a > 0) || !(b > 0))
    throw ArgumentError("harmonic mean needs positive inputs");
  return 2.0 * a * b / (a + b);
}

double combined_score(double inform, double success, double bleu,
                      const CombinedScoreWeights& weights) {
  return weights.inform * inform + weights.success * success +
         weights.bleu * bleu;
}

// ---------------------------------------------------------------------------
// evaluate

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {
      "bleu",       "bleu-1",     "bleu-2",     "bleu-3",  "bleu-4",
      "rouge-1",    "rouge-2",    "rouge-l",    "distinct-1",
      "distinct-2", "distinct-3", "distinct-4", "self-bleu", "meteor",
      "em",         "f1"};
  return names;
}

bool is_known_metric(std::string_view name) {
  const auto& names = metric_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Smoothing parse_smoothing(std::string_view name) {
  if (name == "none") return Smoothing::none;
  if (name == "epsilon") return Smoothing::epsilon;
  if (name == "add-k" || name == "add_k") return Smoothing::add_k;
  throw ConfigError("unknown BLEU smoothing '" + std::string(name) +
                    "' (none, epsilon, add-k)");
}

std::string_view to_string(Smoothing smoothing) {
  switch (smoothing) {
    case Smoothing::none: return "none";
    case Smoothing::epsilon: return "epsilon";
    case Smoothing::add_k: return "add-k";
  }
  return "epsilon";
}

std::vector<std::string> parse_metric_list(std::string_view csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t comma = csv.find(',', start);
    if (comma == std::string_view::npos) comma = csv.size();
    std::string name(csv.substr(start, comma - start));
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (!name.empty()) {
      if (!is_known_metric(name)) {
        std::string valid;
        for (const auto& n : metric_names()) valid += (valid.empty() ? "" : ", ") + n;
        throw ConfigError("unknown metric '" + name + "' (valid: " + valid + ")");
      }
      if (std::find(out.begin(), out.end(), name) == out.end())
        out.push_back(std::move(name));
    }
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("empty metric list");
  return out;
}

std::vector<GenerationRecord> join_records(std::span<const Prediction> predictions,
                                           std::span<const Example> examples) {
  std::unordered_map<std::string, const Example*> by_id;
  for (const auto& ex : examples) by_id.emplace(ex.id, &ex);
  std::unordered_set<std::string> predicted;
  std::vector<std::string> missing_refs;
  std::vector<GenerationRecord> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) {
    predicted.insert(p.id);
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      missing_refs.push_back(p.id);
      continue;
    }
    out.push_back({p.id, p.hypothesis, it->second->references, it->second->source});
  }
  std::vector<std::string> missing_hyps;
  for (const auto& ex : examples)
    if (!predicted.count(ex.id)) missing_hyps.push_back(ex.id);
  if (!missing_refs.empty() || !missing_hyps.empty()) {
    std::string msg = "ids do not align";
    const auto list = [&](const char* label, const std::vector<std::string>& ids) {
      if (ids.empty()) return;
      msg += std::string("; ") + label + ":";
      for (std::size_t i = 0; i < ids.size() && i < 20; ++i) msg += " " + ids[i];
      if (ids.size() > 20) msg += " (+" + std::to_string(ids.size() - 20) + " more)";
    };
    list("no reference for", missing_refs);
    list("no hypothesis for", missing_hyps);
    throw AlignmentError(msg);
  }
  return out;
}

MetricReport evaluate(std::span<const GenerationRecord> records,
                      std::span<const std::string> metrics,
                      const EvalOptions& options) {
  if (records.empty()) throw ArgumentError("evaluate: no records");
  std::string joined;
  for (const auto& m : metrics) joined += m + ",";
  const std::vector<std::string> wanted = parse_metric_list(joined);
  options.bleu.validate();

  const auto wants = [&](std::string_view name) {
    return std::find(wanted.begin(), wanted.end(), name) != wanted.end();
  };

  // Highest n-gram order any requested BLEU/ROUGE variant reads.
  std::size_t bleu_order = 0;
  for (const auto& m : wanted) {
    if (m == "bleu") bleu_order = std::max(bleu_order, options.bleu.max_n);
    if (m.size() == 6 && m.rfind("bleu-", 0) == 0)
      bleu_order = std::max<std::size_t>(bleu_order, m[5] - '0');
  }
  std::size_t cache_order = bleu_order;
  if (wants("rouge-1")) cache_order = std::max<std::size_t>(cache_order, 1);
  if (wants("rouge-2")) cache_order = std::max<std::size_t>(cache_order, 2);

  const std::size_t count = records.size();
  struct Work {
    TokenSeq hyp;
    std::vector<TokenSeq> refs;
    BleuStats bleu{0};
    std::map<std::string, double> values;
  };
  std::vector<Work> work(count);

  parallel_for(count, options.workers, [&](std::size_t i) {
    const GenerationRecord& rec = records[i];
    if (rec.references.empty())
      throw ValidationError("record '" + rec.id + "' has no references");
    Work& w = work[i];
    w.hyp = tokenize(rec.hypothesis, options.tokenizer);
    for (const auto& r : rec.references)
      w.refs.push_back(tokenize(r, options.tokenizer));

    if (cache_order > 0) {
      const NgramCache hyp_cache(w.hyp, cache_order);
      std::vector<NgramCache> ref_caches;
      ref_caches.reserve(w.refs.size());
      for (const auto& r : w.refs) ref_caches.emplace_back(r, cache_order);
      if (bleu_order > 0) w.bleu = stats_from_caches(hyp_cache, ref_caches, bleu_order);
      for (std::size_t n : {std::size_t{1}, std::size_t{2}}) {
        const std::string name = "rouge-" + std::to_string(n);
        if (!wants(name)) continue;
        std::vector<PRF> scores;
        for (const auto& rc : ref_caches)
          scores.push_back(rouge_from_counts(hyp_cache.order(n), rc.order(n)));
        w.values[name] = best_f1(scores).f1;
      }
    }
    if (wants("rouge-l")) w.values["rouge-l"] = rouge_l(w.hyp, w.refs).f1;
    if (wants("meteor")) w.values["meteor"] = meteor(w.hyp, w.refs, options.meteor);
    if (wants("em"))
      w.values["em"] = exact_match(rec.hypothesis, rec.references, options.normalizer);
    if (wants("f1"))
      w.values["f1"] = token_f1(rec.hypothesis, rec.references, options.normalizer);
  });

  MetricReport report;
  report.n = count;
  for (const auto& name : wanted) {
    std::vector<double> per_sample(count, kNaN);
    double corpus = 0.0;

    if (name == "bleu" || name.rfind("bleu-", 0) == 0) {
      BleuConfig cfg = options.bleu;
      if (name != "bleu") {
        cfg.max_n = static_cast<std::size_t>(name[5] - '0');
        cfg.weights.clear();
      }
      BleuStats total(cfg.max_n);
      for (std::size_t i = 0; i < count; ++i) {
        const BleuStats s = truncate_stats(work[i].bleu, cfg.max_n);
        per_sample[i] = bleu_from_stats(s, cfg);
        total += s;
      }
      corpus = bleu_from_stats(total, cfg);
    } else if (name.rfind("distinct-", 0) == 0) {
      const std::size_t n = static_cast<std::size_t>(name[9] - '0');
      std::vector<TokenSeq> hyps;
      hyps.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        const NGramCounts c = ngrams(work[i].hyp, n);
        if (c.total() > 0)
          per_sample[i] = static_cast<double>(c.size()) / static_cast<double>(c.total());
        hyps.push_back(work[i].hyp);
      }
      corpus = distinct_n(hyps, n);
    } else if (name == "self-bleu") {
      std::vector<TokenSeq> hyps;
      hyps.reserve(count);
      for (const auto& w : work) hyps.push_back(w.hyp);
      SelfBleuOptions sb;
      sb.bleu = options.bleu;
      sb.sample_cap = options.self_bleu_cap;
      sb.seed = options.self_bleu_seed;
      const SelfBleuResult r = self_bleu(hyps, sb);
      for (std::size_t i = 0; i < count; ++i)
        if (r.per_sample[i]) per_sample[i] = *r.per_sample[i];
      corpus = r.score;
    } else {
      for (std::size_t i = 0; i < count; ++i) per_sample[i] = work[i].values.at(name);
      corpus = in_order_mean(per_sample);
    }
    report.corpus[name] = corpus;
    report.per_sample[name] = std::move(per_sample);
  }
  return report;
}

std::string report_to_json(const MetricReport& report, int indent) {
  nlohmann::json j;
  j["n"] = report.n;
  j["corpus"] = nlohmann::json::object();
  for (const auto& [k, v] : report.corpus) j["corpus"][k] = v;
  j["per_sample"] = nlohmann::json::object();
  for (const auto& [k, values] : report.per_sample) {
    auto arr = nlohmann::json::array();
    for (double v : values) arr.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
    j["per_sample"][k] = std::move(arr);
  }
  if (!report.across_seeds.empty()) {
    for (const auto& [k, ms] : report.across_seeds)
      j["across_seeds"][k] = {{"mean", ms.mean}, {"std", ms.std}};
  }
  return j.dump(indent);
}

}  // namespace genforge
