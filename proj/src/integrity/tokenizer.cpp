#include "codetrail/integrity/tokenizer.hpp"

namespace codetrail::integrity {

namespace {

bool space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool ident_start(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' || c >= 0x80; }
bool ident_char(unsigned char c) { return ident_start(c) || digit(c); }

bool starts_with(std::string_view s, std::size_t at, std::string_view prefix) {
  return !prefix.empty() && s.compare(at, prefix.size(), prefix) == 0;
}

}  // namespace

TokenStream normalize_tokens(std::string_view src, const LanguageProfile& profile) {
  TokenStream out;
  out.language_profile = profile.name;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(src[i]);
    if (space(c)) {
      ++i;
      continue;
    }
    bool skipped = false;
    for (const auto& marker : profile.line_comments) {
      if (starts_with(src, i, marker)) {
        const auto nl = src.find('\n', i);
        i = nl == std::string_view::npos ? n : nl + 1;
        skipped = true;
        break;
      }
    }
    if (skipped) continue;
    for (const auto& [open, close] : profile.block_comments) {
      if (starts_with(src, i, open)) {
        const auto end = src.find(close, i + open.size());
        i = end == std::string_view::npos ? n : end + close.size();
        skipped = true;
        break;
      }
    }
    if (skipped) continue;

    if (profile.string_quotes.find(static_cast<char>(c)) != std::string::npos) {
      std::size_t j = i + 1;
      while (j < n && src[j] != static_cast<char>(c) && src[j] != '\n') j += src[j] == '\\' ? 2 : 1;
      i = std::min(j + 1, n);
      out.tokens.emplace_back(kLiteralToken);
    } else if (digit(c) || (c == '.' && i + 1 < n && digit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < n) {
        const auto d = static_cast<unsigned char>(src[j]);
        const auto prev = static_cast<unsigned char>(src[j - 1]);
        if (ident_char(d) || d == '.' || ((d == '+' || d == '-') && (prev == 'e' || prev == 'E'))) ++j;
        else break;
      }
      i = j;
      out.tokens.emplace_back(kLiteralToken);
    } else if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < n && ident_char(static_cast<unsigned char>(src[j]))) ++j;
      const std::string_view word = src.substr(i, j - i);
      out.tokens.emplace_back(profile.reserved.count(word) ? std::string(word) : std::string(kIdentToken));
      i = j;
    } else {
      out.tokens.emplace_back(1, static_cast<char>(c));
      ++i;
    }
  }
  return out;
}

TokenStream normalize_tokens(std::string_view source, const ProfileRegistry& profiles, std::string_view profile) {
  return normalize_tokens(source, profiles.find(profile));
}

}  // namespace codetrail::integrity
