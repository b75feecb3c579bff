#include "codetrail/store/ingest.hpp"

#include "codetrail/error.hpp"

namespace codetrail::store {

namespace {

bool blank(std::string_view line) { return line.find_first_not_of(" \t\r") == std::string_view::npos; }

}  // namespace

json receipt_to_json(const IngestReceipt& receipt) {
  json accepted = json::array();
  for (const auto& [id, seq] : receipt.accepted) accepted.push_back({{"event_id", id}, {"seq", seq}});
  json rejected = json::array();
  for (const auto& r : receipt.rejected) {
    json violations = json::array();
    for (const auto& v : r.violations) violations.push_back({{"code", std::string(to_string(v.code))}, {"detail", v.detail}});
    rejected.push_back({{"ref", r.ref}, {"violations", std::move(violations)}});
  }
  return json{{"accepted", std::move(accepted)}, {"duplicates", receipt.duplicates}, {"rejected", std::move(rejected)}};
}

IngestReceipt receipt_from_json(const json& value) {
  IngestReceipt receipt;
  try {
    for (const auto& a : value.at("accepted"))
      receipt.accepted.emplace_back(a.at("event_id").get<std::string>(), a.at("seq").get<Seq>());
    for (const auto& d : value.at("duplicates")) receipt.duplicates.push_back(d.get<std::string>());
    for (const auto& r : value.at("rejected")) {
      Rejection rej{r.at("ref").get<std::string>(), {}};
      for (const auto& v : r.at("violations")) {
        // Unknown codes from a newer server degrade to MalformedJson.
        ViolationCode code = ViolationCode::MalformedJson;
        const auto name = v.at("code").get<std::string>();
        for (int c = 0; c <= static_cast<int>(ViolationCode::ActorScope); ++c)
          if (to_string(static_cast<ViolationCode>(c)) == name) code = static_cast<ViolationCode>(c);
        rej.violations.push_back({code, v.value("detail", std::string())});
      }
      receipt.rejected.push_back(std::move(rej));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::MalformedBody, std::string("receipt does not parse: ") + ex.what());
  }
  return receipt;
}

IngestService::IngestService(EventStore& store, Roster roster, IngestOptions options)
    : store_(store), roster_(std::move(roster)), options_(options) {}

IngestReceipt IngestService::ingest_batch(std::string_view body, std::string_view token) {
  const auto scope = roster_.scope_for(token);
  if (!scope) throw Error(ErrorCode::Unauthorized, "unknown bearer token");
  if (body.size() > options_.max_body_bytes)
    throw Error(ErrorCode::BodyTooLarge,
                std::to_string(body.size()) + " bytes exceeds the " + std::to_string(options_.max_body_bytes) + " byte cap");
  return ingest(body, *scope);
}

IngestReceipt IngestService::ingest_trusted(std::string_view body) { return ingest(body, kAnyActor); }

IngestReceipt IngestService::ingest(std::string_view body, std::string_view scope) {
  IngestReceipt receipt;
  std::vector<Event> valid;
  std::size_t lines = 0;
  std::size_t json_lines = 0;
  std::size_t start = 0;
  std::size_t number = 0;
  while (start < body.size()) {
    std::size_t nl = body.find('\n', start);
    if (nl == std::string_view::npos) nl = body.size();
    std::string_view line = body.substr(start, nl - start);
    start = nl + 1;
    ++number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (blank(line)) continue;
    ++lines;

    DecodeResult decoded = decode_event(line);
    const bool parsed_json = !has_violation(decoded.violations, ViolationCode::MalformedJson) &&
                             !has_violation(decoded.violations, ViolationCode::InvalidUtf8);
    json_lines += parsed_json;
    std::string ref = "line:" + std::to_string(number);
    if (parsed_json) {
      try {
        const json obj = json::parse(line);
        if (obj.is_object() && obj.contains("event_id") && obj["event_id"].is_string())
          ref = obj["event_id"].get<std::string>();
      } catch (const json::exception&) {
      }
    }
    if (decoded.event) {
      auto semantic = validate(*decoded.event);
      decoded.violations.insert(decoded.violations.end(), semantic.begin(), semantic.end());
      if (scope != kAnyActor && decoded.event->actor_id != scope)
        decoded.violations.push_back({ViolationCode::ActorScope, "token may not submit for actor " + decoded.event->actor_id});
    }
    if (!decoded.violations.empty() || !decoded.event) {
      receipt.rejected.push_back({std::move(ref), std::move(decoded.violations)});
      continue;
    }
    valid.push_back(std::move(*decoded.event));
  }
  if (lines > 0 && json_lines == 0) throw Error(ErrorCode::MalformedBody, "no line of the body is JSON");

  AppendResult appended = store_.append(valid);
  receipt.accepted = std::move(appended.accepted);
  receipt.duplicates = std::move(appended.duplicates);
  return receipt;
}

}  // namespace codetrail::store
