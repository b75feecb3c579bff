#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace codetrail::integrity {

/// A language's reserved words and lexical conventions, read from a plain-text
/// table:
///
///   # comment
///   @line_comment //
///   @block_comment /* */
///   @string_quotes "'
///   auto break case char ...
///
/// Lines not starting with `@` or `#` list reserved words separated by whitespace.
struct LanguageProfile {
  std::string name;
  std::set<std::string, std::less<>> reserved;
  std::vector<std::string> line_comments;
  std::vector<std::pair<std::string, std::string>> block_comments;
  std::string string_quotes;

  /// Throws Error{ConfigError} on a malformed directive.
  static LanguageProfile parse(std::string name, std::string_view text);
};

/// Profiles by name. The C-like profile "c" is always available; more come from
/// `<dir>/<name>.txt` files.
class ProfileRegistry {
 public:
  ProfileRegistry();

  /// Adds every `*.txt` table in `dir`, replacing same-named profiles.
  void load_dir(const std::filesystem::path& dir);
  void add(LanguageProfile profile);

  /// Throws Error{UnknownProfile}.
  const LanguageProfile& find(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, LanguageProfile, std::less<>> profiles_;
};

/// The table behind the built-in "c" profile.
std::string_view builtin_c_profile_table();

/// Directory holding the bundled profile tables.
std::filesystem::path default_profile_dir();

}  // namespace codetrail::integrity
