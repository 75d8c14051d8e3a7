#include "genforge/corpus.hpp"
#include "genforge/error.hpp"

#include <algorithm>

namespace genforge {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

/// Decodes one scalar starting at text[pos] and advances pos. Malformed
/// sequences consume one byte and yield U+FFFD.
char32_t decode_utf8(std::string_view text, std::size_t& pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(text[i]);
  };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  std::size_t extra = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
    min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
    min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
    min = 0x10000;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + extra >= text.size()) {
    ++pos;
    return kReplacement;
  }
  for (std::size_t k = 1; k <= extra; ++k) {
    if ((byte(pos + k) & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (byte(pos + k) & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kReplacement;
  }
  pos += extra + 1;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 ||
         cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

/// Anything that is neither a word character nor whitespace: ASCII
/// punctuation and symbols, Latin-1 symbols, general punctuation, arrows and
/// math blocks, CJK and fullwidth punctuation.
bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60 && cp != '_') ||
           (cp >= 0x7B && cp <= 0x7E);
  }
  return in(cp, 0xA1, 0xBF) || cp == 0xD7 || cp == 0xF7 ||
         in(cp, 0x2010, 0x2027) || in(cp, 0x2030, 0x205E) ||
         in(cp, 0x2190, 0x2BFF) || in(cp, 0x2E00, 0x2E7F) ||
         in(cp, 0x3001, 0x3003) || in(cp, 0x3008, 0x3011) ||
         in(cp, 0x3014, 0x301F) || in(cp, 0xFE10, 0xFE6F) ||
         in(cp, 0xFF01, 0xFF0F) || in(cp, 0xFF1A, 0xFF20) ||
         in(cp, 0xFF3B, 0xFF40) || in(cp, 0xFF5B, 0xFF65);
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp < 0x80) return cp;
  if (in(cp, 0xC0, 0xDE) && cp != 0xD7) return cp + 0x20;
  if (in(cp, 0x391, 0x3A9) && cp != 0x3A2) return cp + 0x20;
  if (in(cp, 0x410, 0x42F)) return cp + 0x20;
  if (in(cp, 0x400, 0x40F)) return cp + 0x50;
  return cp;
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t before = pos;
    const char32_t cp = decode_utf8(text, pos);
    // A genuine U+FFFD is three bytes; a decoding failure consumes one.
    if (cp == kReplacement && pos - before == 1) return false;
  }
  return true;
}

TokenizerMode parse_tokenizer_mode(std::string_view name) {
  if (name == "whitespace") return TokenizerMode::whitespace;
  if (name == "unicode" || name == "unicode-word+punct")
    return TokenizerMode::unicode_word_punct;
  if (name == "character" || name == "char") return TokenizerMode::character;
  throw ConfigError("unknown tokenizer mode '" + std::string(name) +
                    "' (valid: whitespace, unicode, character)");
}

std::string_view to_string(TokenizerMode mode) {
  switch (mode) {
    case TokenizerMode::whitespace:
      return "whitespace";
    case TokenizerMode::unicode_word_punct:
      return "unicode";
    case TokenizerMode::character:
      return "character";
  }
  return "unicode";
}

TokenSeq tokenize(std::string_view text, const TokenizerSpec& spec) {
  TokenSeq tokens;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = decode_utf8(text, pos);
    if (is_space(cp)) {
      flush();
      continue;
    }
    if (spec.lowercase) cp = to_lower(cp);

    switch (spec.mode) {
      case TokenizerMode::character: {
        std::string single;
        append_utf8(single, cp);
        tokens.push_back(std::move(single));
        break;
      }
      case TokenizerMode::whitespace:
        if (!(spec.strip_punctuation && is_punct(cp))) append_utf8(current, cp);
        break;
      case TokenizerMode::unicode_word_punct:
        if (is_punct(cp)) {
          flush();
          if (!spec.strip_punctuation) {
            std::string single;
            append_utf8(single, cp);
            tokens.push_back(std::move(single));
          }
        } else {
          append_utf8(current, cp);
        }
        break;
    }
  }
  flush();
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace genforge
