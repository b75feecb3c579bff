#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "codetrail/integrity/profile.hpp"

namespace codetrail::integrity {

inline constexpr std::string_view kIdentToken = "IDENT";
inline constexpr std::string_view kLiteralToken = "LIT";

struct TokenStream {
  std::vector<std::string> tokens;
  std::string language_profile;

  friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

/// Drops whitespace and comments; reserved words stay verbatim, other identifiers
/// become IDENT, numeric and string literals become LIT, and every other byte is
/// a one-character operator token. Bytes >= 0x80 are identifier characters.
///
///   "int x = 10;"  ->  int IDENT = LIT ;
TokenStream normalize_tokens(std::string_view source, const LanguageProfile& profile);

/// Throws Error{UnknownProfile}.
TokenStream normalize_tokens(std::string_view source, const ProfileRegistry& profiles, std::string_view profile);

}  // namespace codetrail::integrity
