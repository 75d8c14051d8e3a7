#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace genforge {

using TokenSeq = std::vector<std::string>;

/// One source text paired with one or more reference texts.
struct Example {
  std::string id;
  std::string source;
  std::vector<std::string> references;

  friend bool operator==(const Example&, const Example&) = default;
};

struct Dataset {
  std::string name;
  /// Split name (train, valid, test) to examples in file order.
  std::map<std::string, std::vector<Example>> splits;

  const std::vector<Example>& split(const std::string& split_name) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class DataFormat { jsonl, tsv };

/// Loads a dataset. A directory is scanned for `<name>.{train,valid,test}.jsonl`
/// (or `.tsv`); a single file becomes one split named after its
/// `.train/.valid/.test` infix, defaulting to `test`.
///
/// Throws ParseError (with line number) on malformed records,
/// EmptyDatasetError when nothing was read, and ValidationError on duplicate
/// ids, empty references or invalid UTF-8.
Dataset load_dataset(const std::filesystem::path& path,
                     DataFormat format = DataFormat::jsonl);

/// Parses one split from a stream of JSONL records.
std::vector<Example> read_jsonl_examples(std::istream& in);
/// TSV lines are `source<TAB>target[<TAB>target...]`; ids are line numbers.
std::vector<Example> read_tsv_examples(std::istream& in);

void write_jsonl_examples(std::ostream& out, std::span<const Example> examples);

/// Writes every split as `<dir>/<name>.<split>.jsonl`.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Checks the split invariants; throws ValidationError listing offenders.
void validate_examples(std::span<const Example> examples);

bool is_valid_utf8(std::string_view text);

/// One generated text, as written by `decode`: `{"id": .., "hypothesis": ..}`.
struct Prediction {
  std::string id;
  std::string hypothesis;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Extra fields are ignored. Throws ParseError, EmptyDatasetError, or
/// ValidationError on duplicate ids.
std::vector<Prediction> read_predictions(std::istream& in);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Tokenization

enum class TokenizerMode { whitespace, unicode_word_punct, character };

struct TokenizerSpec {
  TokenizerMode mode = TokenizerMode::unicode_word_punct;
  bool lowercase = true;
  /// Ignored in character mode.
  bool strip_punctuation = false;
};

/// Parses "whitespace", "unicode" or "character".
TokenizerMode parse_tokenizer_mode(std::string_view name);
std::string_view to_string(TokenizerMode mode);

/// Deterministic segmentation. Invalid UTF-8 bytes decode as U+FFFD.
TokenSeq tokenize(std::string_view text, const TokenizerSpec& spec = {});

std::string join_tokens(std::span<const std::string> tokens);

// ---------------------------------------------------------------------------
// N-gram counting

/// Multiset of the n-grams of one token sequence (or several, when merged).
/// Keys are length-prefixed encodings of the n-gram, so any token content is
/// collision free.
class NGramCounts {
 public:
  explicit NGramCounts(std::size_t order);

  std::size_t order() const noexcept { return order_; }
  /// Sum of all counts.
  std::size_t total() const noexcept { return total_; }
  /// Number of distinct n-grams.
  std::size_t size() const noexcept { return counts_.size(); }
  bool empty() const noexcept { return counts_.empty(); }

  std::size_t count(std::span<const std::string> gram) const;
  void add(std::span<const std::string> gram, std::size_t times = 1);

  /// Decoded n-grams with their counts, in lexicographic order.
  std::vector<std::pair<TokenSeq, std::size_t>> items() const;

  /// Raw encoded-key view for the metric kernels.
  const std::unordered_map<std::string, std::size_t>& raw() const noexcept {
    return counts_;
  }

  static std::string encode(std::span<const std::string> gram);

 private:
  std::size_t order_;
  std::size_t total_ = 0;
  std::unordered_map<std::string, std::size_t> counts_;
};

/// Sliding-window n-gram multiset. Throws ArgumentError when n == 0.
NGramCounts ngrams(std::span<const std::string> tokens, std::size_t n);

}  // namespace genforge
