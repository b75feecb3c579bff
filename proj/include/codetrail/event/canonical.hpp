#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "codetrail/event/event.hpp"
#include "codetrail/event/validate.hpp"

namespace codetrail {

using json = nlohmann::json;

/// JSON object for an event. Keys are kept in a sorted map, so `dump()` with no
/// indentation is already the canonical byte form.
json event_to_json(const Event& event, bool include_id = true);

/// Canonical bytes of an event with its event_id excluded: UTF-8 JSON, keys sorted at
/// every depth, no insignificant whitespace. Throws Error{NonCanonicalizable} on
/// invalid UTF-8 in any string field.
std::string canonicalize(const Event& event);

/// Canonical JSON of the whole event including event_id (the wire and storage line).
std::string encode_event(const Event& event);

/// Lowercase hex SHA-256 of `bytes`.
std::string compute_event_id(std::string_view bytes);

/// Serializes any JSON value canonically (sorted keys, compact, strict UTF-8).
std::string canonical_dump(const json& value);

struct DecodeResult {
  std::optional<Event> event;
  std::vector<Violation> violations;  // structural problems found while decoding
};

/// Structural decode of one wire event. When `event` is set the structure was
/// sound; semantic checks are left to `validate`.
DecodeResult decode_event(const json& value);
DecodeResult decode_event(std::string_view line);

/// Decode plus validate; the event is returned only when no violation exists.
DecodeResult decode_and_validate(std::string_view line);

json stored_event_to_json(const StoredEvent& stored);
std::string encode_stored_event(const StoredEvent& stored);
/// Throws Error{MalformedEvent} when the line is not a stored event record.
StoredEvent decode_stored_event(std::string_view line);

json payload_to_json(const Payload& payload);

}  // namespace codetrail
