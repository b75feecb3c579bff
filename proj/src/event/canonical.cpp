#include "codetrail/event/canonical.hpp"

#include <initializer_list>
#include <set>

#include "codetrail/error.hpp"
#include "codetrail/event/hash.hpp"

namespace codetrail {

namespace {

json hunk_to_json(const Hunk& h) {
  return json{{"start_line", h.start_line}, {"deleted", h.deleted}, {"inserted", h.inserted}};
}

struct PayloadWriter {
  json operator()(const FileOpenPayload& p) const { return {{"file", p.file}}; }
  json operator()(const FileSnapshotPayload& p) const {
    return {{"file", p.file}, {"content", p.content}, {"line_count", p.line_count}};
  }
  json operator()(const FileDiffPayload& p) const {
    json hunks = json::array();
    for (const auto& h : p.hunks) hunks.push_back(hunk_to_json(h));
    return {{"file", p.file}, {"base_event_id", p.base_event_id}, {"hunks", std::move(hunks)}};
  }
  json operator()(const FileSavePayload& p) const {
    return {{"file", p.file}, {"content_sha256", p.content_sha256}, {"line_count", p.line_count}};
  }
  json operator()(const DiagnosticPayload& p) const {
    json j = {{"level", std::string(to_string(p.level))}, {"message", p.message}, {"file", p.file},
              {"source", p.source}};
    if (p.line) j["line"] = *p.line;
    return j;
  }
  json operator()(const RunStartPayload& p) const { return {{"run_id", p.run_id}, {"command", p.command}}; }
  json operator()(const RunEndPayload& p) const { return {{"run_id", p.run_id}, {"exit_code", p.exit_code}}; }
  json operator()(const SubmissionPayload& p) const { return {{"files", p.files}}; }
  json operator()(const HeartbeatPayload&) const { return json::object(); }
};

// Field readers that record a violation instead of throwing.
class Reader {
 public:
  Reader(const json& obj, std::string scope, std::vector<Violation>& out) : obj_(obj), scope_(std::move(scope)), out_(out) {}

  const json* field(const char* name, bool required = true) {
    auto it = obj_.find(name);
    if (it == obj_.end()) {
      if (required) out_.push_back({ViolationCode::MissingField, scope_ + name});
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> string(const char* name, bool required = true) {
    const json* v = field(name, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      out_.push_back({ViolationCode::WrongType, scope_ + name + " must be a string"});
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<std::uint64_t> unsigned_int(const char* name, bool required = true) {
    const json* v = field(name, required);
    if (!v) return std::nullopt;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      out_.push_back({ViolationCode::WrongType, scope_ + name + " must be a non-negative integer"});
      return std::nullopt;
    }
    return v->get<std::uint64_t>();
  }

  std::optional<std::int64_t> signed_int(const char* name) {
    const json* v = field(name);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      out_.push_back({ViolationCode::WrongType, scope_ + name + " must be an integer"});
      return std::nullopt;
    }
    return v->get<std::int64_t>();
  }

  std::optional<std::vector<std::string>> string_list(const char* name) {
    const json* v = field(name);
    if (!v) return std::nullopt;
    if (!v->is_array()) {
      out_.push_back({ViolationCode::WrongType, scope_ + name + " must be an array of strings"});
      return std::nullopt;
    }
    std::vector<std::string> items;
    for (const auto& s : *v) {
      if (!s.is_string()) {
        out_.push_back({ViolationCode::WrongType, scope_ + name + " must be an array of strings"});
        return std::nullopt;
      }
      items.push_back(s.get<std::string>());
    }
    return items;
  }

  void only(std::initializer_list<const char*> allowed) {
    std::set<std::string> names(allowed.begin(), allowed.end());
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!names.count(it.key())) out_.push_back({ViolationCode::UnknownField, scope_ + it.key()});
  }

 private:
  const json& obj_;
  std::string scope_;
  std::vector<Violation>& out_;
};

std::optional<Payload> decode_payload(EventKind kind, const json& p, std::vector<Violation>& out) {
  if (!p.is_object()) {
    out.push_back({ViolationCode::PayloadMismatch, "payload must be an object"});
    return std::nullopt;
  }
  std::vector<Violation> local;
  Reader r(p, "payload.", local);
  std::optional<Payload> result;
  switch (kind) {
    case EventKind::FileOpen: {
      r.only({"file"});
      auto file = r.string("file");
      if (file) result = FileOpenPayload{*file};
      break;
    }
    case EventKind::FileSnapshot: {
      r.only({"file", "content", "line_count"});
      auto file = r.string("file");
      auto content = r.string("content");
      auto lc = r.unsigned_int("line_count");
      if (file && content && lc) result = FileSnapshotPayload{*file, *content, *lc};
      break;
    }
    case EventKind::FileDiff: {
      r.only({"file", "base_event_id", "hunks"});
      auto file = r.string("file");
      auto base = r.string("base_event_id");
      const json* hunks = r.field("hunks");
      std::vector<Hunk> parsed;
      bool hunks_ok = hunks != nullptr;
      if (hunks && !hunks->is_array()) {
        local.push_back({ViolationCode::WrongType, "payload.hunks must be an array"});
        hunks_ok = false;
      } else if (hunks) {
        for (const auto& hj : *hunks) {
          if (!hj.is_object()) {
            local.push_back({ViolationCode::WrongType, "payload.hunks[] must be objects"});
            hunks_ok = false;
            break;
          }
          Reader hr(hj, "payload.hunks[].", local);
          hr.only({"start_line", "deleted", "inserted"});
          auto start = hr.unsigned_int("start_line");
          auto del = hr.string_list("deleted");
          auto ins = hr.string_list("inserted");
          if (!start || !del || !ins || *start > UINT32_MAX) {
            if (start && *start > UINT32_MAX) local.push_back({ViolationCode::BadStartLine, "start_line out of range"});
            hunks_ok = false;
            continue;
          }
          parsed.push_back(Hunk{static_cast<std::uint32_t>(*start), std::move(*del), std::move(*ins)});
        }
      }
      if (file && base && hunks_ok) result = FileDiffPayload{*file, *base, std::move(parsed)};
      break;
    }
    case EventKind::FileSave: {
      r.only({"file", "content_sha256", "line_count"});
      auto file = r.string("file");
      auto digest = r.string("content_sha256");
      auto lc = r.unsigned_int("line_count");
      if (file && digest && lc) result = FileSavePayload{*file, *digest, *lc};
      break;
    }
    case EventKind::Diagnostic: {
      r.only({"level", "message", "file", "line", "source"});
      auto level_name = r.string("level");
      auto message = r.string("message");
      auto file = r.string("file");
      auto source = r.string("source");
      std::optional<std::uint32_t> line;
      bool line_ok = true;
      if (r.field("line", false)) {
        auto l = r.unsigned_int("line");
        if (!l) {
          line_ok = false;
        } else if (*l > UINT32_MAX) {
          local.push_back({ViolationCode::BadLine, "line out of range"});
          line_ok = false;
        } else {
          line = static_cast<std::uint32_t>(*l);
        }
      }
      std::optional<DiagnosticLevel> level;
      if (level_name) {
        level = parse_diagnostic_level(*level_name);
        if (!level) local.push_back({ViolationCode::WrongType, "payload.level unknown: " + *level_name});
      }
      if (level && message && file && source && line_ok) result = DiagnosticPayload{*level, *message, *file, line, *source};
      break;
    }
    case EventKind::RunStart: {
      r.only({"run_id", "command"});
      auto id = r.string("run_id");
      auto cmd = r.string("command");
      if (id && cmd) result = RunStartPayload{*id, *cmd};
      break;
    }
    case EventKind::RunEnd: {
      r.only({"run_id", "exit_code"});
      auto id = r.string("run_id");
      auto code = r.signed_int("exit_code");
      if (id && code) result = RunEndPayload{*id, *code};
      break;
    }
    case EventKind::Submission: {
      r.only({"files"});
      auto files = r.string_list("files");
      if (files) result = SubmissionPayload{std::move(*files)};
      break;
    }
    case EventKind::Heartbeat: {
      r.only({});
      result = HeartbeatPayload{};
      break;
    }
  }
  if (!local.empty()) {
    // The payload does not have the shape its kind requires.
    out.push_back({ViolationCode::PayloadMismatch, "payload does not match kind " + std::string(to_string(kind))});
    out.insert(out.end(), local.begin(), local.end());
    return std::nullopt;
  }
  return result;
}

}  // namespace

json payload_to_json(const Payload& payload) { return std::visit(PayloadWriter{}, payload); }

json event_to_json(const Event& e, bool include_id) {
  json j = {
      {"schema_version", e.schema_version},
      {"kind", std::string(to_string(e.kind))},
      {"client_ts", e.client_ts.to_string()},
      {"actor_id", e.actor_id},
      {"workspace_id", e.workspace_id},
      {"payload", payload_to_json(e.payload)},
  };
  if (e.exercise_id) j["exercise_id"] = *e.exercise_id;
  if (include_id) j["event_id"] = e.event_id;
  return j;
}

std::string canonical_dump(const json& value) {
  try {
    return value.dump(-1, ' ', false, json::error_handler_t::strict);
  } catch (const json::type_error& ex) {
    throw Error(ErrorCode::NonCanonicalizable, ex.what());
  }
}

std::string canonicalize(const Event& event) { return canonical_dump(event_to_json(event, false)); }

std::string encode_event(const Event& event) { return canonical_dump(event_to_json(event, true)); }

std::string compute_event_id(std::string_view bytes) { return sha256_hex(bytes); }

DecodeResult decode_event(const json& value) {
  DecodeResult result;
  auto& out = result.violations;
  if (!value.is_object()) {
    out.push_back({ViolationCode::MalformedJson, "event must be a JSON object"});
    return result;
  }
  Reader r(value, "", out);
  r.only({"event_id", "schema_version", "kind", "client_ts", "actor_id", "workspace_id", "exercise_id", "payload"});
  auto id = r.string("event_id");
  auto version = r.unsigned_int("schema_version");
  auto kind_name = r.string("kind");
  auto ts_text = r.string("client_ts");
  auto actor = r.string("actor_id");
  auto workspace = r.string("workspace_id");
  std::optional<std::string> exercise;
  bool exercise_ok = true;
  if (r.field("exercise_id", false)) {
    exercise = r.string("exercise_id");
    exercise_ok = exercise.has_value();
  }
  const json* payload = r.field("payload");

  if (version && *version != static_cast<std::uint64_t>(kSchemaVersion)) {
    out.push_back({ViolationCode::UnsupportedSchemaVersion, "schema_version " + std::to_string(*version)});
    version.reset();
  }
  std::optional<EventKind> kind;
  if (kind_name) {
    kind = parse_event_kind(*kind_name);
    if (!kind) out.push_back({ViolationCode::UnknownKind, *kind_name});
  }
  std::optional<Timestamp> ts;
  if (ts_text) {
    ts = Timestamp::parse(*ts_text);
    if (!ts) out.push_back({ViolationCode::BadTimestamp, *ts_text});
  }
  std::optional<Payload> decoded_payload;
  if (kind && payload) decoded_payload = decode_payload(*kind, *payload, out);

  if (id && version && kind && ts && actor && workspace && exercise_ok && decoded_payload) {
    Event e;
    e.event_id = *id;
    e.schema_version = kSchemaVersion;  // anything else was rejected above
    e.kind = *kind;
    e.client_ts = *ts;
    e.actor_id = *actor;
    e.workspace_id = *workspace;
    e.exercise_id = exercise;
    e.payload = std::move(*decoded_payload);
    result.event = std::move(e);
  }
  return result;
}

DecodeResult decode_event(std::string_view line) {
  if (!is_valid_utf8(line)) {
    DecodeResult r;
    r.violations.push_back({ViolationCode::InvalidUtf8, "event line is not valid UTF-8"});
    return r;
  }
  json value;
  try {
    value = json::parse(line);
  } catch (const json::exception& ex) {
    DecodeResult r;
    r.violations.push_back({ViolationCode::MalformedJson, ex.what()});
    return r;
  }
  return decode_event(value);
}

DecodeResult decode_and_validate(std::string_view line) {
  DecodeResult r = decode_event(line);
  if (r.event) {
    auto semantic = validate(*r.event);
    r.violations.insert(r.violations.end(), semantic.begin(), semantic.end());
  }
  if (!r.violations.empty()) r.event.reset();
  return r;
}

json stored_event_to_json(const StoredEvent& stored) {
  return json{{"event", event_to_json(stored.event, true)}, {"seq", stored.seq},
              {"received_ts", stored.received_ts.to_string()}};
}

std::string encode_stored_event(const StoredEvent& stored) { return canonical_dump(stored_event_to_json(stored)); }

StoredEvent decode_stored_event(std::string_view line) {
  json value;
  try {
    value = json::parse(line);
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::MalformedEvent, ex.what());
  }
  if (!value.is_object() || !value.contains("event") || !value.contains("seq") || !value.contains("received_ts") ||
      !value["seq"].is_number_unsigned() || !value["received_ts"].is_string())
    throw Error(ErrorCode::MalformedEvent, "not a stored event record");
  auto decoded = decode_event(value["event"]);
  if (!decoded.event) {
    throw Error(ErrorCode::MalformedEvent,
                "stored event does not decode: " + std::string(to_string(decoded.violations.front().code)));
  }
  auto received = Timestamp::parse(value["received_ts"].get<std::string>());
  if (!received) throw Error(ErrorCode::MalformedEvent, "bad received_ts");
  return StoredEvent{std::move(*decoded.event), value["seq"].get<Seq>(), *received};
}

}  // namespace codetrail
