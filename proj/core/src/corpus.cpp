#include "genforge/corpus.hpp"
#include "genforge/error.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace genforge {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<const char*, 3> kSplitNames = {"train", "valid", "test"};

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r';
  });
}

std::string id_from_json(const json& value, std::size_t line_no) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw ParseError("field 'id' must be a string or integer", line_no);
}

/// Splits "<name>.<split>.<ext>" into (name, split); split is empty when the
/// file name carries no recognised split infix.
std::pair<std::string, std::string> split_file_name(const fs::path& path) {
  const std::string stem = path.stem().string();
  for (const char* split : kSplitNames) {
    const std::string suffix = std::string(".") + split;
    if (stem.size() > suffix.size() &&
        stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0)
      return {stem.substr(0, stem.size() - suffix.size()), split};
  }
  return {stem, ""};
}

std::vector<Example> read_file(const fs::path& path, DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return format == DataFormat::jsonl ? read_jsonl_examples(in)
                                     : read_tsv_examples(in);
}

}  // namespace

const std::vector<Example>& Dataset::split(const std::string& split_name) const {
  const auto it = splits.find(split_name);
  if (it == splits.end())
    throw ArgumentError("dataset '" + name + "' has no split '" + split_name +
                        "'");
  return it->second;
}

void validate_examples(std::span<const Example> examples) {
  std::set<std::string> seen;
  std::set<std::string> duplicates;
  std::vector<std::string> problems;
  for (const auto& ex : examples) {
    if (ex.id.empty()) problems.push_back("empty id");
    if (!seen.insert(ex.id).second) duplicates.insert(ex.id);
    if (ex.references.empty())
      problems.push_back("example '" + ex.id + "' has no references");
    for (const auto& ref : ex.references) {
      if (ref.empty())
        problems.push_back("example '" + ex.id + "' has an empty reference");
      if (!is_valid_utf8(ref))
        problems.push_back("example '" + ex.id + "' reference is not UTF-8");
    }
    if (!is_valid_utf8(ex.source))
      problems.push_back("example '" + ex.id + "' source is not UTF-8");
  }
  if (!duplicates.empty()) {
    std::string msg = "duplicate ids:";
    for (const auto& id : duplicates) msg += " \"" + id + "\"";
    problems.insert(problems.begin(), msg);
  }
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) {
      if (!msg.empty()) msg += "; ";
      msg += p;
    }
    throw ValidationError(msg);
  }
}

std::vector<Example> read_jsonl_examples(std::istream& in) {
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!record.is_object()) throw ParseError("record is not an object", line_no);

    Example ex;
    if (!record.contains("id")) throw ParseError("missing field 'id'", line_no);
    ex.id = id_from_json(record["id"], line_no);

    if (!record.contains("source") || !record["source"].is_string())
      throw ParseError("missing string field 'source'", line_no);
    ex.source = record["source"].get<std::string>();

    if (!record.contains("target"))
      throw ParseError("missing field 'target'", line_no);
    const json& target = record["target"];
    if (target.is_string()) {
      ex.references.push_back(target.get<std::string>());
    } else if (target.is_array()) {
      for (const auto& t : target) {
        if (!t.is_string())
          throw ParseError("'target' entries must be strings", line_no);
        ex.references.push_back(t.get<std::string>());
      }
    } else {
      throw ParseError("'target' must be a string or list of strings", line_no);
    }
    if (ex.references.empty())
      throw ParseError("'target' has no references", line_no);
    out.push_back(std::move(ex));
  }
  if (out.empty()) throw EmptyDatasetError("no records");
  validate_examples(out);
  return out;
}

std::vector<Prediction> read_predictions(std::istream& in) {
  std::vector<Prediction> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!record.is_object()) throw ParseError("record is not an object", line_no);
    if (!record.contains("id")) throw ParseError("missing field 'id'", line_no);
    if (!record.contains("hypothesis") || !record["hypothesis"].is_string())
      throw ParseError("missing string field 'hypothesis'", line_no);
    Prediction p{id_from_json(record["id"], line_no),
                 record["hypothesis"].get<std::string>()};
    if (!seen.insert(p.id).second)
      throw ValidationError("duplicate ids: \"" + p.id + "\"");
    out.push_back(std::move(p));
  }
  if (out.empty()) throw EmptyDatasetError("no predictions");
  return out;
}

std::vector<Prediction> read_predictions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return read_predictions(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  }
}

std::vector<Example> read_tsv_examples(std::istream& in) {
  std::vector<Example> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2)
      throw ParseError("expected source<TAB>target", line_no);
    Example ex;
    ex.id = std::to_string(line_no);
    ex.source = std::move(fields[0]);
    ex.references.assign(std::make_move_iterator(fields.begin() + 1),
                         std::make_move_iterator(fields.end()));
    out.push_back(std::move(ex));
  }
  if (out.empty()) throw EmptyDatasetError("no records");
  validate_examples(out);
  return out;
}

void write_jsonl_examples(std::ostream& out, std::span<const Example> examples) {
  for (const auto& ex : examples) {
    json record = {{"id", ex.id}, {"source", ex.source}, {"target", ex.references}};
    out << record.dump() << '\n';
  }
}

Dataset load_dataset(const fs::path& path, DataFormat format) {
  Dataset dataset;
  const char* ext = format == DataFormat::jsonl ? ".jsonl" : ".tsv";

  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ext)
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      auto [name, split] = split_file_name(file);
      if (split.empty()) continue;
      if (!dataset.name.empty() && dataset.name != name)
        throw ValidationError("directory mixes datasets '" + dataset.name +
                              "' and '" + name + "'");
      dataset.name = name;
      try {
        dataset.splits[split] = read_file(file, format);
      } catch (const ParseError& e) {
        throw ParseError(file.filename().string() + ": " + e.detail(),
                         e.line());
      }
    }
    if (dataset.splits.empty())
      throw EmptyDatasetError("no <name>.{train,valid,test}" + std::string(ext) +
                              " files in " + path.string());
    return dataset;
  }

  if (!fs::exists(path)) throw Error("no such file: " + path.string());
  auto [name, split] = split_file_name(path);
  dataset.name = name;
  dataset.splits[split.empty() ? "test" : split] = read_file(path, format);
  return dataset;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& [split, examples] : dataset.splits) {
    std::ofstream out(dir / (dataset.name + "." + split + ".jsonl"),
                      std::ios::binary);
    if (!out) throw Error("cannot write to " + dir.string());
    write_jsonl_examples(out, examples);
  }
}

// ---------------------------------------------------------------------------

NGramCounts::NGramCounts(std::size_t order) : order_(order) {
  if (order == 0) throw ArgumentError("n-gram order must be >= 1");
}

std::string NGramCounts::encode(std::span<const std::string> gram) {
  std::string key;
  std::size_t bytes = 0;
  for (const auto& tok : gram) bytes += tok.size() + 4;
  key.reserve(bytes);
  for (const auto& tok : gram) {
    const auto len = static_cast<std::uint32_t>(tok.size());
    char prefix[4];
    std::memcpy(prefix, &len, 4);
    key.append(prefix, 4);
    key += tok;
  }
  return key;
}

std::size_t NGramCounts::count(std::span<const std::string> gram) const {
  if (gram.size() != order_) return 0;
  const auto it = counts_.find(encode(gram));
  return it == counts_.end() ? 0 : it->second;
}

void NGramCounts::add(std::span<const std::string> gram, std::size_t times) {
  if (gram.size() != order_)
    throw ArgumentError("n-gram length does not match counter order");
  counts_[encode(gram)] += times;
  total_ += times;
}

std::vector<std::pair<TokenSeq, std::size_t>> NGramCounts::items() const {
  std::vector<std::pair<TokenSeq, std::size_t>> out;
  out.reserve(counts_.size());
  for (const auto& [key, count] : counts_) {
    TokenSeq gram;
    std::size_t pos = 0;
    while (pos < key.size()) {
      std::uint32_t len = 0;
      std::memcpy(&len, key.data() + pos, 4);
      gram.emplace_back(key.substr(pos + 4, len));
      pos += 4 + len;
    }
    out.emplace_back(std::move(gram), count);
  }
  std::sort(out.begin(), out.end());
  return out;
}

NGramCounts ngrams(std::span<const std::string> tokens, std::size_t n) {
  NGramCounts counts(n);
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    counts.add(tokens.subspan(i, n));
  return counts;
}

}  // namespace genforge
