#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codetrail/event/canonical.hpp"
#include "codetrail/event/validate.hpp"
#include "codetrail/store/event_store.hpp"

namespace codetrail::store {

inline constexpr std::string_view kAnyActor = "*";

/// Bearer tokens mapped to the actor they may submit for.
///
/// File format: one `<token> <actor_id>` pair per line; blank lines and lines
/// starting with `#` are ignored. The actor `*` grants an import/admin token that
/// may submit and read events for any actor.
class Roster {
 public:
  static Roster parse(std::string_view text);
  static Roster load(const std::filesystem::path& path);

  void add(std::string token, std::string actor_scope);
  /// Actor scope for a token, or nullopt when the token is unknown.
  std::optional<std::string> scope_for(std::string_view token) const;
  std::vector<std::string> tokens() const;

 private:
  std::map<std::string, std::string, std::less<>> by_token_;
};

struct Rejection {
  std::string ref;  // event_id when one could be read, else "line:<n>"
  std::vector<Violation> violations;
};

/// Outcome of one batch. accepted, duplicates and rejected partition the
/// submitted (non-blank) lines.
struct IngestReceipt {
  std::vector<std::pair<std::string, Seq>> accepted;
  std::vector<std::string> duplicates;
  std::vector<Rejection> rejected;
};

json receipt_to_json(const IngestReceipt& receipt);
IngestReceipt receipt_from_json(const json& value);

struct IngestOptions {
  std::size_t max_body_bytes = 8u << 20;
};

/// The server half of `POST /v1/events`: authenticate, decode and validate every
/// NDJSON line independently, then append the valid ones in one durable write.
class IngestService {
 public:
  IngestService(EventStore& store, Roster roster, IngestOptions options = {});

  /// Throws Error{Unauthorized}, Error{BodyTooLarge} or Error{MalformedBody}.
  IngestReceipt ingest_batch(std::string_view body, std::string_view token);

  /// Auth-free local import, used for bundle re-ingest from the CLI.
  IngestReceipt ingest_trusted(std::string_view body);

  const Roster& roster() const { return roster_; }
  EventStore& store() { return store_; }

 private:
  IngestReceipt ingest(std::string_view body, std::string_view scope);

  EventStore& store_;
  Roster roster_;
  IngestOptions options_;
};

}  // namespace codetrail::store
