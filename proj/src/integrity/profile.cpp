#include "codetrail/integrity/profile.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "codetrail/error.hpp"

namespace fs = std::filesystem;

namespace codetrail::integrity {

namespace {

// Keep in step with data/profiles/c.txt; a test compares the two.
constexpr std::string_view kBuiltinC =
    "# C-like languages: C plus the C++ and Java keywords students meet in intro courses.\n"
    "@line_comment //\n"
    "@block_comment /* */\n"
    "@string_quotes \"'\n"
    "auto break case char const continue default do double else enum extern float for goto if\n"
    "inline int long register restrict return short signed sizeof static struct switch typedef\n"
    "union unsigned void volatile while\n"
    "bool catch class delete false namespace new nullptr private protected public template this\n"
    "throw true try using virtual\n"
    "boolean byte extends final finally implements import instanceof interface package super\n";

std::vector<std::string> words(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

std::string_view builtin_c_profile_table() { return kBuiltinC; }

fs::path default_profile_dir() {
  if (const char* env = std::getenv("CODETRAIL_DATA_DIR")) return fs::path(env) / "profiles";
  return fs::path(CODETRAIL_DATA_DIR) / "profiles";
}

LanguageProfile LanguageProfile::parse(std::string name, std::string_view text) {
  LanguageProfile p;
  p.name = std::move(name);
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto w = words(line);
    if (w.empty() || w.front().front() == '#') continue;
    if (w.front().front() != '@') {
      p.reserved.insert(w.begin(), w.end());
      continue;
    }
    auto bad = [&](const std::string& why) {
      throw Error(ErrorCode::ConfigError, "profile " + p.name + " line " + std::to_string(number) + ": " + why);
    };
    if (w.front() == "@line_comment") {
      if (w.size() != 2) bad("@line_comment takes one marker");
      p.line_comments.push_back(w[1]);
    } else if (w.front() == "@block_comment") {
      if (w.size() != 3) bad("@block_comment takes an opening and a closing marker");
      p.block_comments.emplace_back(w[1], w[2]);
    } else if (w.front() == "@string_quotes") {
      if (w.size() != 2) bad("@string_quotes takes one run of quote characters");
      p.string_quotes = w[1];
    } else {
      bad("unknown directive " + w.front());
    }
  }
  return p;
}

ProfileRegistry::ProfileRegistry() { add(LanguageProfile::parse("c", kBuiltinC)); }

void ProfileRegistry::load_dir(const fs::path& dir) {
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    add(LanguageProfile::parse(entry.path().stem().string(), buf.str()));
  }
}

void ProfileRegistry::add(LanguageProfile profile) {
  std::string name = profile.name;
  profiles_.insert_or_assign(std::move(name), std::move(profile));
}

const LanguageProfile& ProfileRegistry::find(std::string_view name) const {
  auto it = profiles_.find(name);
  if (it == profiles_.end()) throw Error(ErrorCode::UnknownProfile, "no language profile named '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> ProfileRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, p] : profiles_) out.push_back(name);
  return out;
}

}  // namespace codetrail::integrity
