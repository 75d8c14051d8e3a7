#include "genforge/config.hpp"
#include "genforge/error.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace genforge {

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::vector<std::string> split_list(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(sep, start), text.size());
    std::string item = trim(text.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = end + 1;
  }
  return out;
}

namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view what, const char* kind) {
  const std::string t = trim(text);
  T value{};
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && t.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (t.empty() || ec != std::errc() || ptr != last)
    throw ConfigError(std::string(what) + ": expected " + kind + ", got '" + t + "'");
  return value;
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
  return parse_number<double>(text, what, "a number");
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  return parse_number<std::int64_t>(text, what, "an integer");
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
  return parse_number<std::uint64_t>(text, what, "a nonnegative integer");
}

bool parse_bool(std::string_view text, std::string_view what) {
  std::string t = trim(text);
  for (char& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
  if (t == "false" || t == "no" || t == "off" || t == "0") return false;
  throw ConfigError(std::string(what) + ": expected a boolean, got '" + t + "'");
}

std::string format_double(double value) {
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    double back = 0;
    std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
    if (back == value) break;
  }
  return buf;
}

Config Config::parse(std::istream& in) {
  Config cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    cfg.values_[std::move(key)] = trim(std::string_view(t).substr(eq + 1));
  }
  return cfg;
}

Config Config::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.detail(), e.line());
  }
}

void Config::set(const std::string& key, std::string value) {
  if (trim(key).empty()) throw ConfigError("empty config key");
  values_[key] = std::move(value);
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string Config::get_or(const std::string& key, std::string_view fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? std::string(fallback) : it->second;
}

double Config::get_double(const std::string& key) const { return parse_double(get(key), key); }
std::int64_t Config::get_int(const std::string& key) const { return parse_int(get(key), key); }
std::uint64_t Config::get_uint(const std::string& key) const {
  return parse_uint(get(key), key);
}
bool Config::get_bool(const std::string& key) const { return parse_bool(get(key), key); }
std::vector<std::string> Config::get_list(const std::string& key) const {
  return split_list(get(key));
}

void Config::merge(const Config& overlay) {
  for (const auto& [k, v] : overlay.values_) values_[k] = v;
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace genforge
