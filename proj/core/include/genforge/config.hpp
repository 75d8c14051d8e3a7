#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace genforge {

/// Flat `key = value` configuration with dotted keys (`decode.beam_size`).
/// Lines starting with '#' and blank lines are ignored; later assignments
/// override earlier ones. Typed getters throw ConfigError naming the key.
class Config {
 public:
  /// Throws ParseError (1-based line) on a line without '=' or an empty key.
  static Config parse(std::istream& in);
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  bool erase(const std::string& key) { return values_.erase(key) != 0; }

  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, std::string_view fallback) const;

  double get_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  /// true/false, yes/no, on/off, 1/0.
  bool get_bool(const std::string& key) const;
  /// Comma-separated, items trimmed, empty items dropped.
  std::vector<std::string> get_list(const std::string& key) const;

  /// Copies every key of `overlay` over this config.
  void merge(const Config& overlay);

  /// Sorted `key = value` lines; parse(dump()) == *this.
  std::string dump() const;

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  friend bool operator==(const Config&, const Config&) = default;

 private:
  std::map<std::string, std::string> values_;
};

std::string trim(std::string_view text);
std::vector<std::string> split_list(std::string_view text, char sep = ',');

/// Strict whole-string numeric parsing; ConfigError mentions `what`.
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::uint64_t parse_uint(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);

/// Shortest "%.17g"-style text that parses back to the same double.
std::string format_double(double value);

}  // namespace genforge
