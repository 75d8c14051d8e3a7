#include "genforge/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace genforge {
namespace {

bool ends_with(std::string_view word, std::string_view suffix) {
  return word.size() >= suffix.size() &&
         word.compare(word.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

/// Search budget; beyond it the best alignment found so far is kept.
constexpr std::size_t kMaxSearchNodes = 2'000'000;

struct Candidate {
  std::size_t ref_pos;
  bool exact;
};

class AlignmentSearch {
 public:
  AlignmentSearch(std::span<const std::string> hyp,
                  std::span<const std::string> ref)
      : candidates_(hyp.size()), used_(ref.size(), false),
        current_(hyp.size(), kUnmatched) {
    std::vector<std::string> hyp_stems;
    std::vector<std::string> ref_stems;
    for (const auto& w : hyp) hyp_stems.push_back(simple_stem(w));
    for (const auto& w : ref) ref_stems.push_back(simple_stem(w));
    for (std::size_t i = 0; i < hyp.size(); ++i) {
      for (std::size_t j = 0; j < ref.size(); ++j)
        if (hyp[i] == ref[j]) candidates_[i].push_back({j, true});
      for (std::size_t j = 0; j < ref.size(); ++j)
        if (hyp[i] != ref[j] && hyp_stems[i] == ref_stems[j])
          candidates_[i].push_back({j, false});
    }
    // Suffix counts of positions that could still match, for the bound.
    exact_left_.assign(hyp.size() + 1, 0);
    any_left_.assign(hyp.size() + 1, 0);
    for (std::size_t i = hyp.size(); i-- > 0;) {
      const bool has_exact = std::any_of(candidates_[i].begin(), candidates_[i].end(),
                                         [](const Candidate& c) { return c.exact; });
      exact_left_[i] = exact_left_[i + 1] + (has_exact ? 1 : 0);
      any_left_[i] = any_left_[i + 1] + (candidates_[i].empty() ? 0 : 1);
    }
  }

  MeteorAlignment run() {
    best_current_ = current_;
    dfs(0, 0, 0, 0);
    MeteorAlignment out;
    out.exact_matches = best_exact_;
    out.matches = best_total_;
    out.chunks = best_chunks_;
    for (std::size_t i = 0; i < best_current_.size(); ++i)
      if (best_current_[i] != kUnmatched) out.pairs.emplace_back(i, best_current_[i]);
    return out;
  }

 private:
  static constexpr std::size_t kUnmatched = SIZE_MAX;

  /// Lexicographic objective: more exact, more total, fewer chunks.
  bool better(std::size_t exact, std::size_t total, std::size_t chunks) const {
    if (exact != best_exact_) return exact > best_exact_;
    if (total != best_total_) return total > best_total_;
    return chunks < best_chunks_;
  }

  void dfs(std::size_t i, std::size_t exact, std::size_t total,
           std::size_t chunks) {
    if (++nodes_ > kMaxSearchNodes) return;
    if (i == candidates_.size()) {
      if (better(exact, total, chunks)) {
        best_exact_ = exact;
        best_total_ = total;
        best_chunks_ = chunks;
        best_current_ = current_;
      }
      return;
    }
    // Optimistic completion: every remaining matchable position matches and
    // extends the current chunk.
    if (!better(exact + exact_left_[i], total + any_left_[i], chunks)) return;

    const std::size_t prev = i > 0 ? current_[i - 1] : kUnmatched;
    const auto try_match = [&](const Candidate& c) {
      if (used_[c.ref_pos]) return;
      const bool continues = prev != kUnmatched && c.ref_pos == prev + 1;
      used_[c.ref_pos] = true;
      current_[i] = c.ref_pos;
      dfs(i + 1, exact + (c.exact ? 1 : 0), total + 1, chunks + (continues ? 0 : 1));
      current_[i] = kUnmatched;
      used_[c.ref_pos] = false;
    };

    // Chunk-continuing candidates first, then exact before stem.
    for (const auto& c : candidates_[i])
      if (prev != kUnmatched && c.ref_pos == prev + 1) try_match(c);
    for (const auto& c : candidates_[i])
      if (!(prev != kUnmatched && c.ref_pos == prev + 1)) try_match(c);
    dfs(i + 1, exact, total, chunks);
  }

  std::vector<std::vector<Candidate>> candidates_;
  std::vector<bool> used_;
  std::vector<std::size_t> current_;
  std::vector<std::size_t> best_current_;
  std::vector<std::size_t> exact_left_;
  std::vector<std::size_t> any_left_;
  std::size_t best_exact_ = 0;
  std::size_t best_total_ = 0;
  std::size_t best_chunks_ = 0;
  std::size_t nodes_ = 0;
};

}  // namespace

std::string simple_stem(std::string_view word) {
  std::string w(word);
  if (w.size() <= 3) return w;

  if (ends_with(w, "sses")) {
    w.resize(w.size() - 2);
  } else if (ends_with(w, "ies")) {
    w.resize(w.size() - 2);
  } else if (!ends_with(w, "ss") && !ends_with(w, "us") && ends_with(w, "s")) {
    w.pop_back();
  }

  bool stripped = false;
  for (std::string_view suffix : {"ing", "ed", "ly"}) {
    if (ends_with(w, suffix) && w.size() - suffix.size() >= 3) {
      const std::string_view rest(w.data(), w.size() - suffix.size());
      if (std::any_of(rest.begin(), rest.end(), is_vowel)) {
        w.resize(rest.size());
        stripped = true;
      }
      break;
    }
  }
  // running -> runn -> run
  if (stripped && w.size() >= 3) {
    const char last = w.back();
    if (last == w[w.size() - 2] && !is_vowel(last) && last != 'l' &&
        last != 's' && last != 'z')
      w.pop_back();
  }
  return w;
}

MeteorAlignment meteor_align(std::span<const std::string> hypothesis,
                             std::span<const std::string> reference) {
  return AlignmentSearch(hypothesis, reference).run();
}

double meteor_from_alignment(const MeteorAlignment& alignment,
                             std::size_t hyp_length, std::size_t ref_length,
                             const MeteorParams& params) {
  if (alignment.matches == 0 || hyp_length == 0 || ref_length == 0) return 0.0;
  const auto m = static_cast<double>(alignment.matches);
  const double precision = m / static_cast<double>(hyp_length);
  const double recall = m / static_cast<double>(ref_length);
  const double fmean = precision * recall /
                       (params.alpha * precision + (1.0 - params.alpha) * recall);
  const double fragmentation = static_cast<double>(alignment.chunks) / m;
  const double penalty = params.gamma * std::pow(fragmentation, params.beta);
  return fmean * (1.0 - penalty);
}

double meteor(std::span<const std::string> hypothesis,
              std::span<const TokenSeq> references, const MeteorParams& params) {
  double best = 0.0;
  for (const auto& ref : references) {
    const MeteorAlignment a = meteor_align(hypothesis, ref);
    best = std::max(best, meteor_from_alignment(a, hypothesis.size(), ref.size(), params));
  }
  return best;
}

}  // namespace genforge
