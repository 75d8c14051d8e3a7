#include "genforge/objectives.hpp"
#include "genforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace genforge {
namespace {

constexpr std::size_t kMaxSpanLength = 10;

std::size_t masked_count(std::size_t length, double ratio) {
  const auto n = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(length)));
  return std::clamp<std::size_t>(n, 1, length);
}

/// Places spans with the given lengths uniformly at random among the
/// arrangements that keep at least `min_gap` unmasked tokens between
/// consecutive spans. Returns spans in ascending start order.
std::vector<Span> place_spans(std::span<const std::size_t> lengths,
                              std::size_t length, std::size_t min_gap, Rng& rng) {
  const std::size_t count = lengths.size();
  const std::size_t masked = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
  const std::size_t reserved = count > 0 ? min_gap * (count - 1) : 0;
  if (masked + reserved > length)
    throw ArgumentError("spans do not fit in the sequence");
  const std::size_t free_tokens = length - masked - reserved;

  // Stars and bars: choose which of the free_tokens + count slots hold spans.
  const std::size_t slots = free_tokens + count;
  std::vector<std::size_t> pool(slots);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t k = 0; k < count; ++k)
    std::swap(pool[k], pool[k + uniform_index(rng, slots - k)]);
  std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(chosen.begin(), chosen.end());

  std::vector<Span> spans;
  std::size_t pos = 0;
  std::size_t prev_slot = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t gap = chosen[k] - (k == 0 ? 0 : prev_slot + 1);
    pos += gap + (k == 0 ? 0 : min_gap);
    spans.push_back({pos, lengths[k]});
    pos += lengths[k];
    prev_slot = chosen[k];
  }
  return spans;
}

[[noreturn]] void integrity(const std::string& what) { throw IntegrityError(what); }

std::vector<std::string> permute_tokens(std::span<const std::string> tokens,
                                        const CorruptionPlan& plan) {
  if (plan.sentence_order.empty()) return {tokens.begin(), tokens.end()};
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (std::size_t idx : plan.sentence_order) {
    if (idx >= plan.sentences.size()) integrity("sentence order out of range");
    const Span s = plan.sentences[idx];
    if (s.start + s.length > tokens.size()) integrity("sentence extent out of range");
    out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(s.start),
               tokens.begin() + static_cast<std::ptrdiff_t>(s.start + s.length));
  }
  if (out.size() != tokens.size()) integrity("sentences do not cover the sequence");
  return out;
}

TokenSeq unpermute_tokens(std::span<const std::string> permuted,
                          const CorruptionPlan& plan) {
  if (plan.sentence_order.empty()) return {permuted.begin(), permuted.end()};
  TokenSeq out(permuted.size());
  std::size_t pos = 0;
  for (std::size_t idx : plan.sentence_order) {
    const Span s = plan.sentences[idx];
    std::copy_n(permuted.begin() + static_cast<std::ptrdiff_t>(pos), s.length,
                out.begin() + static_cast<std::ptrdiff_t>(s.start));
    pos += s.length;
  }
  return out;
}

TokenSeq reconstruct_lm(const CorruptionPair& pair) {
  const auto& in = pair.input;
  const auto& tg = pair.target;
  if (in.empty() || in.size() != tg.size()) integrity("lm input/target length mismatch");
  for (std::size_t k = 0; k + 1 < in.size(); ++k)
    if (in[k + 1] != tg[k]) integrity("lm target is not the shifted input");
  TokenSeq out = in;
  out.push_back(tg.back());
  return out;
}

TokenSeq reconstruct_mass(const CorruptionPair& pair) {
  if (pair.plan.spans.size() != 1) integrity("masked-seq2seq plan needs one span");
  const Span s = pair.plan.spans.front();
  if (s.start + s.length > pair.input.size() || s.length != pair.target.size())
    integrity("masked-seq2seq span does not match input/target");
  TokenSeq out = pair.input;
  for (std::size_t k = 0; k < s.length; ++k) {
    if (out[s.start + k] != kMaskToken) integrity("expected <mask> inside the span");
    out[s.start + k] = pair.target[k];
  }
  for (std::size_t k = 0; k < out.size(); ++k)
    if (out[k] == kMaskToken) integrity("stray <mask> outside the span");
  return out;
}

TokenSeq reconstruct_denoise(const CorruptionPair& pair) {
  const CorruptionPlan& plan = pair.plan;
  const std::vector<std::string> permuted = permute_tokens(pair.target, plan);
  const auto& in = pair.input;
  TokenSeq filled;
  filled.reserve(permuted.size());
  std::size_t ii = 0;
  std::size_t p = 0;
  std::size_t s = 0;
  for (;;) {
    while (s < plan.spans.size() && plan.spans[s].start == p) {
      const Span sp = plan.spans[s];
      if (ii >= in.size() || in[ii] != kMaskToken) integrity("expected <mask> at a span");
      if (p + sp.length > permuted.size()) integrity("span runs past the target");
      filled.insert(filled.end(), permuted.begin() + static_cast<std::ptrdiff_t>(p),
                    permuted.begin() + static_cast<std::ptrdiff_t>(p + sp.length));
      p += sp.length;
      ++ii;
      ++s;
    }
    if (p >= permuted.size()) break;
    if (ii >= in.size() || in[ii] != permuted[p])
      integrity("input token disagrees with target at position " + std::to_string(p));
    filled.push_back(in[ii]);
    ++ii;
    ++p;
  }
  if (ii != in.size() || s != plan.spans.size())
    integrity("input has tokens or spans left over");
  TokenSeq original = unpermute_tokens(filled, plan);
  if (original != pair.target) integrity("reconstruction disagrees with target");
  return original;
}

TokenSeq reconstruct_span(const CorruptionPair& pair) {
  // Target: <s0> span0 <s1> span1 ... <sK>
  std::vector<TokenSeq> segments;
  std::size_t expected = 0;
  for (const auto& tok : pair.target) {
    if (const auto idx = sentinel_index(tok)) {
      if (*idx != expected)
        integrity("target sentinel " + tok + " out of order (expected " +
                  sentinel_token(expected) + ")");
      ++expected;
      segments.emplace_back();
    } else {
      if (segments.empty()) integrity("target does not start with a sentinel");
      segments.back().push_back(tok);
    }
  }
  if (segments.empty()) integrity("target has no sentinels");
  if (!segments.back().empty()) integrity("target lacks a terminal sentinel");
  segments.pop_back();

  const auto& plan_spans = pair.plan.spans;
  if (!plan_spans.empty() && plan_spans.size() != segments.size())
    integrity("plan and target disagree on the number of spans");

  TokenSeq out;
  std::size_t next = 0;
  for (const auto& tok : pair.input) {
    if (const auto idx = sentinel_index(tok)) {
      if (*idx != next || next >= segments.size())
        integrity("input sentinel " + tok + " has no matching target span");
      if (!plan_spans.empty() &&
          (plan_spans[next].start != out.size() ||
           plan_spans[next].length != segments[next].size()))
        integrity("span " + tok + " disagrees with the plan");
      out.insert(out.end(), segments[next].begin(), segments[next].end());
      ++next;
    } else {
      out.push_back(tok);
    }
  }
  if (next != segments.size()) integrity("target has spans missing from the input");
  return out;
}

}  // namespace

Objective parse_objective(std::string_view name) {
  if (name == "lm") return Objective::lm;
  if (name == "masked-seq2seq" || name == "mass") return Objective::masked_seq2seq;
  if (name == "denoising" || name == "denoise") return Objective::denoising;
  if (name == "span-prediction" || name == "span") return Objective::span_prediction;
  throw ConfigError("unknown objective '" + std::string(name) +
                    "' (valid: lm, masked-seq2seq, denoising, span-prediction)");
}

std::string_view to_string(Objective objective) {
  switch (objective) {
    case Objective::lm:
      return "lm";
    case Objective::masked_seq2seq:
      return "masked-seq2seq";
    case Objective::denoising:
      return "denoising";
    case Objective::span_prediction:
      return "span-prediction";
  }
  return "lm";
}

std::string sentinel_token(std::size_t index) {
  return "<s" + std::to_string(index) + ">";
}

std::optional<std::size_t> sentinel_index(std::string_view token) {
  if (token.size() < 4 || token.size() > 5 || token.front() != '<' ||
      token[1] != 's' || token.back() != '>')
    return std::nullopt;
  const std::string_view digits = token.substr(2, token.size() - 3);
  if (digits.size() > 1 && digits.front() == '0') return std::nullopt;
  std::size_t value = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return value < kSentinelCount ? std::optional<std::size_t>(value) : std::nullopt;
}

bool is_reserved_token(std::string_view token) {
  return token == kMaskToken || sentinel_index(token).has_value();
}

void check_no_reserved_tokens(std::span<const std::string> tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (is_reserved_token(tokens[i]))
      throw ValidationError("reserved token '" + tokens[i] + "' at position " +
                            std::to_string(i));
}

CorruptionSpec CorruptionSpec::defaults(Objective objective) {
  CorruptionSpec spec;
  spec.objective = objective;
  switch (objective) {
    case Objective::masked_seq2seq:
      spec.mask_ratio = 0.5;
      break;
    case Objective::denoising:
      spec.mask_ratio = 0.3;
      spec.mean_span = 3.0;
      break;
    case Objective::span_prediction:
      spec.mask_ratio = 0.15;
      spec.mean_span = 3.0;
      break;
    case Objective::lm:
      break;
  }
  return spec;
}

void CorruptionSpec::validate() const {
  if (!(mask_ratio > 0.0 && mask_ratio < 1.0))
    throw ArgumentError("mask_ratio must lie in (0, 1)");
  if (!(mean_span >= 1.0)) throw ArgumentError("mean_span must be >= 1");
}

std::vector<Span> split_sentences(std::span<const std::string> tokens) {
  std::vector<Span> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (!t.empty() && (t.back() == '.' || t.back() == '!' || t.back() == '?')) {
      out.push_back({start, i + 1 - start});
      start = i + 1;
    }
  }
  if (start < tokens.size()) out.push_back({start, tokens.size() - start});
  return out;
}

std::vector<std::size_t> sample_span_lengths(std::size_t total, double mean,
                                             std::size_t min_len,
                                             std::size_t max_len, Rng& rng) {
  std::vector<double> cdf;
  double acc = 0.0;
  for (std::size_t k = min_len; k <= max_len; ++k) {
    // Poisson pmf in log space.
    const double kd = static_cast<double>(k);
    acc += std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
    cdf.push_back(acc);
  }
  for (double& c : cdf) c /= acc;

  std::vector<std::size_t> lengths;
  std::size_t covered = 0;
  while (covered < total) {
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t k =
        min_len + std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                                        cdf.size() - 1);
    lengths.push_back(k);
    covered += k;
  }
  if (covered > total) lengths.back() -= covered - total;
  return lengths;
}

CorruptionPair corrupt_lm(std::span<const std::string> tokens) {
  if (tokens.size() < 2) throw ArgumentError("lm objective needs at least two tokens");
  check_no_reserved_tokens(tokens);
  CorruptionPair pair;
  pair.plan.objective = Objective::lm;
  pair.input.assign(tokens.begin(), tokens.end() - 1);
  pair.target.assign(tokens.begin() + 1, tokens.end());
  return pair;
}

CorruptionPair apply_mass_plan(std::span<const std::string> tokens, Span span) {
  if (span.length == 0 || span.start + span.length > tokens.size())
    throw ArgumentError("masked-seq2seq span out of range");
  CorruptionPair pair;
  pair.plan.objective = Objective::masked_seq2seq;
  pair.plan.spans = {span};
  pair.input.assign(tokens.begin(), tokens.end());
  for (std::size_t k = 0; k < span.length; ++k) {
    pair.target.push_back(tokens[span.start + k]);
    pair.input[span.start + k] = std::string(kMaskToken);
  }
  return pair;
}

CorruptionPair corrupt_mass(std::span<const std::string> tokens,
                            const CorruptionSpec& spec) {
  spec.validate();
  if (tokens.size() < 2)
    throw ArgumentError("masked-seq2seq objective needs at least two tokens");
  check_no_reserved_tokens(tokens);
  Rng rng = make_rng(spec.seed);
  const std::size_t len = masked_count(tokens.size(), spec.mask_ratio);
  const std::size_t start = uniform_index(rng, tokens.size() - len + 1);
  return apply_mass_plan(tokens, {start, len});
}

CorruptionPair apply_denoise_plan(std::span<const std::string> tokens,
                                  const CorruptionPlan& plan) {
  CorruptionPair pair;
  pair.plan = plan;
  pair.plan.objective = Objective::denoising;
  pair.target.assign(tokens.begin(), tokens.end());
  const std::vector<std::string> permuted = permute_tokens(tokens, plan);

  std::size_t p = 0;
  for (const Span& s : plan.spans) {
    if (s.start < p || s.start + s.length > permuted.size())
      throw ArgumentError("denoising spans overlap or run past the sequence");
    pair.input.insert(pair.input.end(), permuted.begin() + static_cast<std::ptrdiff_t>(p),
                      permuted.begin() + static_cast<std::ptrdiff_t>(s.start));
    pair.input.emplace_back(kMaskToken);
    p = s.start + s.length;
  }
  pair.input.insert(pair.input.end(), permuted.begin() + static_cast<std::ptrdiff_t>(p),
                    permuted.end());
  return pair;
}

CorruptionPair corrupt_denoise(std::span<const std::string> tokens,
                               const CorruptionSpec& spec) {
  spec.validate();
  check_no_reserved_tokens(tokens);
  CorruptionPlan plan;
  plan.objective = Objective::denoising;
  if (tokens.empty()) return apply_denoise_plan(tokens, plan);

  Rng rng = make_rng(spec.seed);
  if (spec.permute_sentences) {
    plan.sentences = split_sentences(tokens);
    plan.sentence_order.resize(plan.sentences.size());
    std::iota(plan.sentence_order.begin(), plan.sentence_order.end(), 0);
    for (std::size_t i = plan.sentence_order.size(); i > 1; --i)
      std::swap(plan.sentence_order[i - 1], plan.sentence_order[uniform_index(rng, i)]);
  }
  const std::size_t masked = masked_count(tokens.size(), spec.mask_ratio);
  const auto lengths = sample_span_lengths(masked, spec.mean_span, 0, kMaxSpanLength, rng);
  plan.spans = place_spans(lengths, tokens.size(), 0, rng);
  return apply_denoise_plan(tokens, plan);
}

CorruptionPair corrupt_denoise(std::string_view text, const CorruptionSpec& spec) {
  const TokenSeq tokens =
      tokenize(text, {TokenizerMode::whitespace, /*lowercase=*/false, false});
  return corrupt_denoise(tokens, spec);
}

CorruptionPair apply_span_plan(std::span<const std::string> tokens,
                               std::span<const Span> spans) {
  if (spans.size() + 1 > kSentinelCount)
    throw ArgumentError("too many spans for the sentinel vocabulary");
  CorruptionPair pair;
  pair.plan.objective = Objective::span_prediction;
  pair.plan.spans.assign(spans.begin(), spans.end());
  std::size_t p = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const Span s = spans[i];
    if (s.length == 0 || s.start < p || (i > 0 && s.start == p) ||
        s.start + s.length > tokens.size())
      throw ArgumentError("span-prediction spans must be nonempty, ordered and non-adjacent");
    pair.input.insert(pair.input.end(), tokens.begin() + static_cast<std::ptrdiff_t>(p),
                      tokens.begin() + static_cast<std::ptrdiff_t>(s.start));
    pair.input.push_back(sentinel_token(i));
    pair.target.push_back(sentinel_token(i));
    pair.target.insert(pair.target.end(), tokens.begin() + static_cast<std::ptrdiff_t>(s.start),
                       tokens.begin() + static_cast<std::ptrdiff_t>(s.start + s.length));
    p = s.start + s.length;
  }
  pair.input.insert(pair.input.end(), tokens.begin() + static_cast<std::ptrdiff_t>(p),
                    tokens.end());
  pair.target.push_back(sentinel_token(spans.size()));
  return pair;
}

CorruptionPair corrupt_span(std::span<const std::string> tokens,
                            const CorruptionSpec& spec) {
  spec.validate();
  if (tokens.size() < 2)
    throw ArgumentError("span-prediction objective needs at least two tokens");
  check_no_reserved_tokens(tokens);
  Rng rng = make_rng(spec.seed);
  const std::size_t masked = masked_count(tokens.size(), spec.mask_ratio);
  auto lengths = sample_span_lengths(masked, spec.mean_span, 1, kMaxSpanLength, rng);
  // Non-adjacent spans need count - 1 separating tokens, and the terminal
  // sentinel needs one slot of its own.
  while (lengths.size() > 1 &&
         (lengths.size() - 1 > tokens.size() - masked ||
          lengths.size() + 1 > kSentinelCount)) {
    const std::size_t last = lengths.back();
    lengths.pop_back();
    lengths.back() += last;
  }
  const std::vector<Span> spans = place_spans(lengths, tokens.size(), 1, rng);
  return apply_span_plan(tokens, spans);
}

CorruptionPair corrupt(std::span<const std::string> tokens,
                       const CorruptionSpec& spec) {
  switch (spec.objective) {
    case Objective::lm:
      return corrupt_lm(tokens);
    case Objective::masked_seq2seq:
      return corrupt_mass(tokens, spec);
    case Objective::denoising:
      return corrupt_denoise(tokens, spec);
    case Objective::span_prediction:
      return corrupt_span(tokens, spec);
  }
  throw ArgumentError("unknown objective");
}

TokenSeq reconstruct(const CorruptionPair& pair) {
  switch (pair.plan.objective) {
    case Objective::lm:
      return reconstruct_lm(pair);
    case Objective::masked_seq2seq:
      return reconstruct_mass(pair);
    case Objective::denoising:
      return reconstruct_denoise(pair);
    case Objective::span_prediction:
      return reconstruct_span(pair);
  }
  throw IntegrityError("unknown objective in plan");
}

std::string pair_to_jsonl(std::string_view id, const CorruptionPair& pair) {
  using nlohmann::json;
  const auto spans_json = [](std::span<const Span> spans) {
    json arr = json::array();
    for (const Span& s : spans) arr.push_back({s.start, s.length});
    return arr;
  };
  json plan = {{"objective", to_string(pair.plan.objective)},
               {"spans", spans_json(pair.plan.spans)}};
  if (!pair.plan.sentence_order.empty()) {
    plan["sentences"] = spans_json(pair.plan.sentences);
    plan["sentence_order"] = pair.plan.sentence_order;
  }
  json record = {{"id", id}, {"input", pair.input}, {"target", pair.target}, {"plan", plan}};
  return record.dump();
}

}  // namespace genforge
