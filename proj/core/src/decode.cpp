#include "genforge/decode.hpp"
#include "genforge/error.hpp"
#include "genforge/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace genforge {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr TokenId kNoToken = std::numeric_limits<TokenId>::max();
constexpr double kExhaustiveLimit = 1e6;

/// Per-search context shared by all decoders.
struct SearchContext {
  const Scorer& scorer;
  const Vocabulary& vocab;
  const DecodeParams& params;
  std::vector<TokenId> source_ids;

  SearchContext(const Scorer& s, std::span<const std::string> source,
                const DecodeParams& p)
      : scorer(s), vocab(s.vocabulary()), params(p) {
    params.validate();
    if (params.block_source_ngrams) {
      source_ids.reserve(source.size());
      for (const auto& tok : source) source_ids.push_back(vocab.find(tok).value_or(kNoToken));
    }
  }

  /// blocked[t] is true for BOS and for tokens forbidden by n-gram blocking.
  std::vector<bool> blocked(std::span<const TokenId> prefix) const {
    std::vector<bool> mask(vocab.size(), false);
    if (const auto bos = vocab.bos()) mask[*bos] = true;
    const std::size_t n = params.no_repeat_ngram;
    if (n == 0 || prefix.size() + 1 < n) return mask;
    const auto suffix = prefix.subspan(prefix.size() - (n - 1));
    const auto scan = [&](std::span<const TokenId> seq) {
      if (seq.size() < n) return;
      for (std::size_t i = 0; i + n <= seq.size(); ++i) {
        if (std::equal(suffix.begin(), suffix.end(), seq.begin() + static_cast<std::ptrdiff_t>(i)) &&
            seq[i + n - 1] != kNoToken)
          mask[seq[i + n - 1]] = true;
      }
    };
    scan(prefix);
    if (params.block_source_ngrams) scan(source_ids);
    return mask;
  }
};

Hypothesis finish(std::vector<TokenId> tokens, double log_prob, bool finished,
                  double length_penalty) {
  Hypothesis h;
  h.score = normalized_score(log_prob, tokens.size(), length_penalty);
  h.tokens = std::move(tokens);
  h.log_prob = log_prob;
  h.finished = finished;
  return h;
}

/// Ranking used for final outputs: score descending, then ids ascending.
bool ranks_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

/// Highest allowed, finite token; ties to the lowest index. EOS when none.
TokenId argmax_allowed(std::span<const double> dist, const std::vector<bool>& blocked,
                       TokenId eos) {
  TokenId best = kNoToken;
  for (TokenId t = 0; t < dist.size(); ++t) {
    if (blocked[t] || dist[t] == kNegInf) continue;
    if (best == kNoToken || dist[t] > dist[best]) best = t;
  }
  return best == kNoToken ? eos : best;
}

}  // namespace

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId eos,
                       std::optional<TokenId> bos)
    : tokens_(std::move(tokens)), eos_(eos), bos_(bos) {
  if (eos_ >= tokens_.size()) throw ArgumentError("EOS id outside the vocabulary");
  if (bos_ && (*bos_ >= tokens_.size() || *bos_ == eos_))
    throw ArgumentError("invalid BOS id");
  for (TokenId i = 0; i < tokens_.size(); ++i)
    if (!index_.emplace(tokens_[i], i).second)
      throw ArgumentError("duplicate vocabulary token '" + tokens_[i] + "'");
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Scorer::PrefixScore Scorer::score_prefix(std::span<const std::string> source,
                                         std::span<const TokenId> prefix) const {
  PrefixScore out;
  out.state = begin(source);
  for (TokenId t : prefix) {
    out.log_prob += log_dist(*out.state)[t];
    out.state = extend(out.state, t);
  }
  return out;
}

Strategy parse_strategy(std::string_view name) {
  if (name == "greedy") return Strategy::greedy;
  if (name == "beam") return Strategy::beam;
  if (name == "topk" || name == "top-k") return Strategy::top_k;
  if (name == "topp" || name == "top-p") return Strategy::top_p;
  throw ConfigError("unknown decoding strategy '" + std::string(name) +
                    "' (valid: greedy, beam, topk, topp)");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::greedy:
      return "greedy";
    case Strategy::beam:
      return "beam";
    case Strategy::top_k:
      return "topk";
    case Strategy::top_p:
      return "topp";
  }
  return "beam";
}

void DecodeParams::validate() const {
  if (beam_size < 1) throw ArgumentError("beam_size must be >= 1");
  if (max_len < 1) throw ArgumentError("max_len must be >= 1");
  if (!(length_penalty >= 0)) throw ArgumentError("length_penalty must be >= 0");
  if (!(top_p > 0 && top_p <= 1)) throw ArgumentError("top_p must lie in (0, 1]");
  if (!(temperature > 0)) throw ArgumentError("temperature must be positive");
  if (top_k < 1) throw ArgumentError("top_k must be >= 1");
}

std::vector<std::string> Hypothesis::words(const Vocabulary& vocab) const {
  std::vector<std::string> out;
  for (TokenId t : tokens)
    if (t != vocab.eos() && t != vocab.bos()) out.push_back(vocab.token(t));
  return out;
}

std::string Hypothesis::text(const Vocabulary& vocab) const {
  std::string out;
  for (const auto& w : words(vocab)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

double normalized_score(double log_prob, std::size_t length, double length_penalty) {
  if (length == 0 || length_penalty == 0.0) return log_prob;
  return log_prob / std::pow(static_cast<double>(length), length_penalty);
}

std::set<std::string> ngram_blocklist(std::span<const std::string> prefix,
                                      std::size_t n) {
  if (n == 0) throw ArgumentError("blocking order must be >= 1");
  std::set<std::string> out;
  if (prefix.size() + 1 < n) return out;
  const auto suffix = prefix.subspan(prefix.size() - (n - 1));
  for (std::size_t i = 0; i + n <= prefix.size(); ++i)
    if (std::equal(suffix.begin(), suffix.end(), prefix.begin() + static_cast<std::ptrdiff_t>(i)))
      out.insert(prefix[i + n - 1]);
  return out;
}

std::vector<TokenId> ngram_blocklist(std::span<const TokenId> prefix, std::size_t n) {
  if (n == 0) throw ArgumentError("blocking order must be >= 1");
  std::vector<TokenId> out;
  if (prefix.size() + 1 < n) return out;
  const auto suffix = prefix.subspan(prefix.size() - (n - 1));
  for (std::size_t i = 0; i + n <= prefix.size(); ++i)
    if (std::equal(suffix.begin(), suffix.end(), prefix.begin() + static_cast<std::ptrdiff_t>(i)))
      out.push_back(prefix[i + n - 1]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// ---------------------------------------------------------------------------

Hypothesis greedy(const Scorer& scorer, std::span<const std::string> source,
                  const DecodeParams& params) {
  const SearchContext ctx(scorer, source, params);
  StatePtr state = scorer.begin(source);
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  for (;;) {
    const auto dist = scorer.log_dist(*state);
    const TokenId next = argmax_allowed(dist, ctx.blocked(tokens), ctx.vocab.eos());
    tokens.push_back(next);
    log_prob += dist[next];
    if (next == ctx.vocab.eos() || tokens.size() >= params.max_len) break;
    state = scorer.extend(state, next);
  }
  return finish(std::move(tokens), log_prob, true, params.length_penalty);
}

std::vector<Hypothesis> beam_search(const Scorer& scorer,
                                    std::span<const std::string> source,
                                    const DecodeParams& params) {
  const SearchContext ctx(scorer, source, params);
  const TokenId eos = ctx.vocab.eos();

  struct Live {
    StatePtr state;
    std::vector<TokenId> tokens;
    double log_prob = 0.0;
  };
  struct Candidate {
    double total;
    double step;
    std::size_t parent;
    TokenId token;
  };
  // Total log-prob descending; ties by parent rank, then the step log-prob
  // (so a single beam reproduces greedy argmax exactly), then token id.
  const auto cand_less = [](const Candidate& a, const Candidate& b) {
    if (a.total != b.total) return a.total > b.total;
    if (a.parent != b.parent) return a.parent < b.parent;
    if (a.step != b.step) return a.step > b.step;
    return a.token < b.token;
  };

  std::vector<Live> live;
  live.push_back({scorer.begin(source), {}, 0.0});
  std::vector<Hypothesis> pool;
  const double max_len_norm =
      params.length_penalty == 0.0
          ? 1.0
          : std::pow(static_cast<double>(params.max_len), params.length_penalty);

  for (std::size_t step = 0; step < params.max_len && !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    for (std::size_t p = 0; p < live.size(); ++p) {
      const auto dist = scorer.log_dist(*live[p].state);
      const std::vector<bool> blocked = ctx.blocked(live[p].tokens);
      bool any = false;
      for (TokenId t = 0; t < dist.size(); ++t) {
        if (blocked[t] || dist[t] == kNegInf) continue;
        candidates.push_back({live[p].log_prob + dist[t], dist[t], p, t});
        any = true;
      }
      if (!any) candidates.push_back({live[p].log_prob + dist[eos], dist[eos], p, eos});
    }
    const std::size_t keep = std::min(params.beam_size, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), cand_less);

    std::vector<Live> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const Candidate& cand = candidates[c];
      const Live& parent = live[cand.parent];
      std::vector<TokenId> tokens = parent.tokens;
      tokens.push_back(cand.token);
      if (cand.token == eos || tokens.size() >= params.max_len) {
        pool.push_back(finish(std::move(tokens), cand.total, true, params.length_penalty));
      } else {
        next.push_back({scorer.extend(parent.state, cand.token), std::move(tokens), cand.total});
      }
    }
    live = std::move(next);

    // Log-probs only decrease, so a live prefix can at best reach
    // log_prob / max_len^alpha.
    if (!live.empty() && pool.size() >= params.beam_size) {
      std::vector<double> scores;
      scores.reserve(pool.size());
      for (const auto& h : pool) scores.push_back(h.score);
      std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(params.beam_size - 1),
                       scores.end(), std::greater<>());
      const double worst_kept = scores[params.beam_size - 1];
      double best_live = kNegInf;
      for (const auto& l : live) best_live = std::max(best_live, l.log_prob);
      if (best_live / max_len_norm < worst_kept) break;
    }
  }

  if (pool.empty()) {
    // Unreachable with finite distributions: max_len always finishes a beam.
    std::vector<Hypothesis> out;
    if (!live.empty())
      out.push_back(finish(live.front().tokens, live.front().log_prob, false,
                           params.length_penalty));
    return out;
  }
  std::sort(pool.begin(), pool.end(), ranks_before);
  if (pool.size() > params.beam_size) pool.resize(params.beam_size);
  return pool;
}

TokenId sample_token(std::span<const double> log_dist, const std::vector<bool>& blocked,
                     const Vocabulary& vocab, const DecodeParams& params, Rng& rng) {
  std::vector<TokenId> allowed;
  for (TokenId t = 0; t < log_dist.size(); ++t) {
    if (!blocked.empty() && blocked[t]) continue;
    if (vocab.bos() == t || log_dist[t] == kNegInf) continue;
    allowed.push_back(t);
  }
  if (allowed.empty()) return vocab.eos();
  std::stable_sort(allowed.begin(), allowed.end(), [&](TokenId a, TokenId b) {
    return log_dist[a] > log_dist[b];
  });

  const double top = log_dist[allowed.front()];
  std::vector<double> weights;
  weights.reserve(allowed.size());
  double total = 0.0;
  for (TokenId t : allowed) {
    weights.push_back(std::exp((log_dist[t] - top) / params.temperature));
    total += weights.back();
  }

  std::size_t kept = allowed.size();
  if (params.strategy == Strategy::top_k) {
    kept = std::min(kept, params.top_k);
  } else if (params.strategy == Strategy::top_p && params.top_p < 1.0) {
    double mass = 0.0;
    kept = 0;
    while (kept < allowed.size()) {
      mass += weights[kept] / total;
      ++kept;
      if (mass >= params.top_p) break;
    }
  }
  double kept_total = 0.0;
  for (std::size_t i = 0; i < kept; ++i) kept_total += weights[i];
  const double u = uniform01(rng) * kept_total;
  double acc = 0.0;
  for (std::size_t i = 0; i < kept; ++i) {
    acc += weights[i];
    if (u < acc) return allowed[i];
  }
  return allowed[kept - 1];
}

Hypothesis sample(const Scorer& scorer, std::span<const std::string> source,
                  const DecodeParams& params) {
  const SearchContext ctx(scorer, source, params);
  Rng rng = make_rng(params.seed);
  StatePtr state = scorer.begin(source);
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  for (;;) {
    const auto dist = scorer.log_dist(*state);
    const TokenId next = sample_token(dist, ctx.blocked(tokens), ctx.vocab, params, rng);
    tokens.push_back(next);
    log_prob += dist[next];
    if (next == ctx.vocab.eos() || tokens.size() >= params.max_len) break;
    state = scorer.extend(state, next);
  }
  return finish(std::move(tokens), log_prob, true, params.length_penalty);
}

Hypothesis exhaustive_argmax(const Scorer& scorer, std::span<const std::string> source,
                             const DecodeParams& params) {
  const SearchContext ctx(scorer, source, params);
  const double space = std::pow(static_cast<double>(ctx.vocab.size()),
                                static_cast<double>(params.max_len));
  if (space > kExhaustiveLimit)
    throw SizeError("exhaustive search over " + std::to_string(ctx.vocab.size()) + "^" +
                    std::to_string(params.max_len) + " sequences exceeds the 10^6 guard");
  const TokenId eos = ctx.vocab.eos();

  std::optional<Hypothesis> best;
  std::vector<TokenId> tokens;
  const auto consider = [&](double log_prob) {
    Hypothesis h = finish(tokens, log_prob, true, params.length_penalty);
    if (!best || ranks_before(h, *best)) best = std::move(h);
  };
  const auto visit = [&](const auto& self, const StatePtr& state, double log_prob) -> void {
    const auto dist = scorer.log_dist(*state);
    const std::vector<bool> blocked = ctx.blocked(tokens);
    bool any = false;
    const auto expand = [&](TokenId t) {
      tokens.push_back(t);
      const double lp = log_prob + dist[t];
      if (t == eos || tokens.size() >= params.max_len) {
        consider(lp);
      } else {
        self(self, scorer.extend(state, t), lp);
      }
      tokens.pop_back();
    };
    for (TokenId t = 0; t < dist.size(); ++t) {
      if (blocked[t] || dist[t] == kNegInf) continue;
      any = true;
      expand(t);
    }
    if (!any) expand(eos);
  };
  visit(visit, scorer.begin(source), 0.0);
  return *best;
}

Hypothesis decode(const Scorer& scorer, std::span<const std::string> source,
                  const DecodeParams& params) {
  switch (params.strategy) {
    case Strategy::greedy:
      return greedy(scorer, source, params);
    case Strategy::beam:
      return beam_search(scorer, source, params).front();
    case Strategy::top_k:
    case Strategy::top_p:
      return sample(scorer, source, params);
  }
  throw ArgumentError("unknown strategy");
}

std::vector<Hypothesis> decode_batch(const Scorer& scorer,
                                     std::span<const std::vector<std::string>> sources,
                                     const DecodeParams& params, std::size_t workers) {
  std::vector<Hypothesis> out(sources.size());
  const bool sampling =
      params.strategy == Strategy::top_k || params.strategy == Strategy::top_p;
  parallel_for(sources.size(), workers, [&](std::size_t i) {
    if (!sampling) {
      out[i] = decode(scorer, sources[i], params);
      return;
    }
    DecodeParams local = params;
    local.seed = mix_seed(params.seed, i);
    out[i] = decode(scorer, sources[i], local);
  });
  return out;
}

}  // namespace genforge
