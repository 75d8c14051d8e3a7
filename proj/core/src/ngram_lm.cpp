#include "genforge/ngram_lm.hpp"
#include "genforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

namespace genforge {
namespace {

constexpr TokenId kBos = 0;
constexpr TokenId kEos = 1;

std::string context_key(std::span<const TokenId> context) {
  std::string key(context.size() * sizeof(TokenId), '\0');
  if (!context.empty()) std::memcpy(key.data(), context.data(), key.size());
  return key;
}

struct NgramState final : ScorerState {
  std::vector<TokenId> context;
  std::shared_ptr<const std::vector<double>> copy;
  std::vector<double> log_probs;
};

}  // namespace

NgramLm::NgramLm(Vocabulary vocab, NgramLmOptions options)
    : vocab_(std::move(vocab)), options_(options) {}

std::shared_ptr<const NgramLm> NgramLm::fit(std::span<const TokenSeq> targets,
                                            const NgramLmOptions& options) {
  if (options.order < 1) throw ArgumentError("n-gram order must be >= 1");
  if (!(options.add_k > 0)) throw ArgumentError("add_k must be positive");
  if (!(options.copy_lambda >= 0 && options.copy_lambda < 1))
    throw ArgumentError("copy_lambda must lie in [0, 1)");

  std::set<std::string> words;
  std::size_t token_count = 0;
  for (const auto& seq : targets) {
    words.insert(seq.begin(), seq.end());
    token_count += seq.size();
  }
  if (token_count == 0) throw FitError("no training tokens");

  std::vector<std::string> tokens = {"<bos>", "</s>"};
  for (const auto& w : words)
    if (w != "<bos>" && w != "</s>") tokens.push_back(w);
  auto lm = std::shared_ptr<NgramLm>(
      new NgramLm(Vocabulary(std::move(tokens), kEos, kBos), options));

  const std::size_t ctx_len = options.order - 1;
  std::unordered_map<std::string, std::map<TokenId, std::size_t>> raw;
  for (const auto& seq : targets) {
    std::vector<TokenId> ids(ctx_len, kBos);
    for (const auto& w : seq) ids.push_back(*lm->vocab_.find(w));
    ids.push_back(kEos);
    for (std::size_t i = ctx_len; i < ids.size(); ++i) {
      const std::span<const TokenId> ctx(ids.data() + i - ctx_len, ctx_len);
      ++raw[context_key(ctx)][ids[i]];
    }
  }
  for (auto& [key, next] : raw) {
    ContextCounts& cc = lm->counts_[key];
    for (const auto& [id, c] : next) {
      cc.next.emplace_back(id, c);
      cc.total += c;
    }
  }
  return lm;
}

const NgramLm::ContextCounts* NgramLm::lookup(std::span<const TokenId> context) const {
  const std::size_t ctx_len = options_.order - 1;
  std::vector<TokenId> padded(ctx_len, kBos);
  const std::size_t take = std::min(ctx_len, context.size());
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(),
            padded.end() - static_cast<std::ptrdiff_t>(take));
  const auto it = counts_.find(context_key(padded));
  return it == counts_.end() ? nullptr : &it->second;
}

double NgramLm::ngram_prob(std::span<const TokenId> context, TokenId token) const {
  if (token == kBos) return 0.0;
  const ContextCounts* cc = lookup(context);
  const double predicted = static_cast<double>(vocab_.size() - 1);
  const double total = cc ? static_cast<double>(cc->total) : 0.0;
  double count = 0.0;
  if (cc) {
    const auto it = std::lower_bound(
        cc->next.begin(), cc->next.end(), token,
        [](const std::pair<TokenId, std::size_t>& e, TokenId t) { return e.first < t; });
    if (it != cc->next.end() && it->first == token) count = static_cast<double>(it->second);
  }
  return (count + options_.add_k) / (total + options_.add_k * predicted);
}

std::vector<double> NgramLm::distribution(std::span<const TokenId> context,
                                          const std::vector<double>* copy) const {
  const std::size_t size = vocab_.size();
  const ContextCounts* cc = lookup(context);
  const double total = cc ? static_cast<double>(cc->total) : 0.0;
  const double denom = total + options_.add_k * static_cast<double>(size - 1);

  std::vector<double> probs(size, options_.add_k / denom);
  probs[kBos] = 0.0;
  if (cc)
    for (const auto& [id, c] : cc->next)
      probs[id] = (static_cast<double>(c) + options_.add_k) / denom;

  if (copy) {
    const double lambda = options_.copy_lambda;
    for (std::size_t t = 0; t < size; ++t)
      probs[t] = lambda * (*copy)[t] + (1.0 - lambda) * probs[t];
  }
  for (double& p : probs) p = std::log(p);
  return probs;
}

StatePtr NgramLm::begin(std::span<const std::string> source) const {
  auto state = std::make_shared<NgramState>();
  std::vector<double> copy(vocab_.size(), 0.0);
  std::size_t hits = 0;
  for (const auto& tok : source) {
    const auto id = vocab_.find(tok);
    if (!id || *id == kBos || *id == kEos) continue;
    copy[*id] += 1.0;
    ++hits;
  }
  if (hits > 0 && options_.copy_lambda > 0) {
    for (double& c : copy) c /= static_cast<double>(hits);
    state->copy = std::make_shared<const std::vector<double>>(std::move(copy));
  }
  state->log_probs = distribution(state->context, state->copy.get());
  return state;
}

StatePtr NgramLm::extend(const StatePtr& state, TokenId token) const {
  const auto& prev = static_cast<const NgramState&>(*state);
  auto next = std::make_shared<NgramState>();
  const std::size_t ctx_len = options_.order - 1;
  if (ctx_len > 0) {
    next->context = prev.context;
    next->context.push_back(token);
    if (next->context.size() > ctx_len) next->context.erase(next->context.begin());
  }
  next->copy = prev.copy;
  next->log_probs = distribution(next->context, next->copy.get());
  return next;
}

std::span<const double> NgramLm::log_dist(const ScorerState& state) const {
  return static_cast<const NgramState&>(state).log_probs;
}

std::shared_ptr<const NgramLm> ngram_lm_fit(const Dataset& dataset,
                                            const NgramLmOptions& options,
                                            const TokenizerSpec& tokenizer,
                                            const std::string& split) {
  std::vector<TokenSeq> targets;
  for (const auto& ex : dataset.split(split))
    for (const auto& ref : ex.references) targets.push_back(tokenize(ref, tokenizer));
  return NgramLm::fit(targets, options);
}

}  // namespace genforge
