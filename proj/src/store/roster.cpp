#include <fstream>
#include <sstream>

#include "codetrail/error.hpp"
#include "codetrail/store/ingest.hpp"

namespace codetrail::store {

Roster Roster::parse(std::string_view text) {
  Roster roster;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream fields(line);
    std::string token, actor, extra;
    if (!(fields >> token) || token.front() == '#') continue;
    if (!(fields >> actor) || (fields >> extra))
      throw Error(ErrorCode::ConfigError, "roster line " + std::to_string(number) + ": expected '<token> <actor_id>'");
    if (actor != kAnyActor && !is_valid_actor_id(actor))
      throw Error(ErrorCode::ConfigError, "roster line " + std::to_string(number) + ": invalid actor id '" + actor + "'");
    roster.add(std::move(token), std::move(actor));
  }
  return roster;
}

Roster Roster::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read roster " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Roster::add(std::string token, std::string actor_scope) { by_token_[std::move(token)] = std::move(actor_scope); }

std::optional<std::string> Roster::scope_for(std::string_view token) const {
  auto it = by_token_.find(token);
  if (it == by_token_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Roster::tokens() const {
  std::vector<std::string> out;
  for (const auto& [token, actor] : by_token_) out.push_back(token);
  return out;
}

}  // namespace codetrail::store
