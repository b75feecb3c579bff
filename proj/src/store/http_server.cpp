#include "codetrail/store/http_server.hpp"

#include <httplib.h>

#include <charconv>

#include "codetrail/error.hpp"

namespace codetrail::store {

namespace {

constexpr const char* kNdjson = "application/x-ndjson";
constexpr const char* kJson = "application/json";

std::optional<std::string> bearer_token(const httplib::Request& req) {
  const std::string header = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (header.size() <= prefix.size() || header.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
  return header.substr(prefix.size());
}

void reply_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", std::string(code)}, {"message", message}}.dump(), kJson);
}

std::optional<Seq> parse_seq(const std::string& text) {
  Seq value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

// Builds a filter from query parameters; returns an error message on bad input.
std::optional<std::string> filter_from_query(const httplib::Request& req, EventFilter& filter) {
  auto param = [&](const char* name) -> std::optional<std::string> {
    if (!req.has_param(name)) return std::nullopt;
    std::string v = req.get_param_value(name);
    if (v.empty()) return std::nullopt;
    return v;
  };
  filter.actor_id = param("actor");
  filter.workspace_id = param("workspace");
  filter.exercise_id = param("exercise");
  if (auto kinds = param("kind")) {
    std::size_t start = 0;
    while (start <= kinds->size()) {
      const std::size_t comma = std::min(kinds->find(',', start), kinds->size());
      const std::string name = kinds->substr(start, comma - start);
      auto kind = parse_event_kind(name);
      if (!kind) return "unknown kind '" + name + "'";
      filter.kinds.insert(*kind);
      start = comma + 1;
    }
  }
  for (auto [name, slot] : {std::pair{"from", &filter.from}, std::pair{"to", &filter.to}}) {
    if (auto v = param(name)) {
      auto ts = Timestamp::parse_lenient(*v);
      if (!ts) return std::string("bad timestamp for '") + name + "'";
      *slot = ts;
    }
  }
  for (auto [name, slot] : {std::pair{"from_seq", &filter.from_seq}, std::pair{"to_seq", &filter.to_seq}}) {
    if (auto v = param(name)) {
      auto seq = parse_seq(*v);
      if (!seq) return std::string("bad sequence number for '") + name + "'";
      *slot = seq;
    }
  }
  try {
    filter.check();
  } catch (const Error& err) {
    return err.what();
  }
  return std::nullopt;
}

}  // namespace

struct HttpServer::Impl {
  IngestService& ingest;
  httplib::Server server;

  explicit Impl(IngestService& service) : ingest(service) {
    // Transport-level ceiling only; IngestService enforces the configured cap.
    server.set_payload_max_length(64u << 20);

    server.Post("/v1/events", [this](const httplib::Request& req, httplib::Response& res) { post_events(req, res); });
    server.Get("/v1/events", [this](const httplib::Request& req, httplib::Response& res) { get_events(req, res); });
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      auto& store = ingest.store();
      json status = {{"status", "ok"}, {"schema_version", kSchemaVersion}, {"max_seq", store.max_seq()},
                     {"event_count", store.size()}};
      res.set_content(status.dump(), kJson);
    });
    auto not_allowed = [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Allow", "GET, POST");
      reply_error(res, 405, "MethodNotAllowed", "the event log is insert-only");
    };
    for (const char* pattern : {"/v1/events", R"(/v1/events/.*)"}) {
      server.Put(pattern, not_allowed);
      server.Delete(pattern, not_allowed);
      server.Patch(pattern, not_allowed);
    }
  }

  void post_events(const httplib::Request& req, httplib::Response& res) {
    const auto token = bearer_token(req);
    if (!token) return reply_error(res, 401, "Unauthorized", "missing bearer token");
    try {
      const IngestReceipt receipt = ingest.ingest_batch(req.body, *token);
      res.set_content(receipt_to_json(receipt).dump(), kJson);
    } catch (const Error& err) {
      switch (err.code()) {
        case ErrorCode::Unauthorized:
          return reply_error(res, 401, "Unauthorized", err.what());
        case ErrorCode::BodyTooLarge:
          return reply_error(res, 413, "BodyTooLarge", err.what());
        case ErrorCode::MalformedBody:
          return reply_error(res, 400, "MalformedBody", err.what());
        default:
          return reply_error(res, 500, to_string(err.code()), err.what());
      }
    }
  }

  void get_events(const httplib::Request& req, httplib::Response& res) {
    const auto token = bearer_token(req);
    const auto scope = token ? ingest.roster().scope_for(*token) : std::nullopt;
    if (!scope) return reply_error(res, 401, "Unauthorized", "missing or unknown bearer token");
    EventFilter filter;
    if (auto problem = filter_from_query(req, filter)) return reply_error(res, 400, "BadQuery", *problem);
    if (*scope != kAnyActor) {
      if (filter.actor_id && *filter.actor_id != *scope)
        return reply_error(res, 403, "Forbidden", "token may only read its own events");
      filter.actor_id = *scope;
    }
    std::string body;
    std::vector<SegmentError> errors;
    ingest.store().scan(
        filter,
        [&](const StoredEvent& s) {
          body += encode_stored_event(s);
          body += '\n';
          return true;
        },
        &errors);
    if (!errors.empty()) res.set_header("X-Codetrail-Corrupt-Segments", std::to_string(errors.size()));
    res.set_content(std::move(body), kNdjson);
  }
};

HttpServer::HttpServer(IngestService& ingest) : impl_(std::make_unique<Impl>(ingest)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

std::pair<std::string, int> parse_listen_address(const std::string& address) {
  std::string host = "127.0.0.1";
  std::string port_text = address;
  if (const auto colon = address.rfind(':'); colon != std::string::npos) {
    host = address.substr(0, colon);
    port_text = address.substr(colon + 1);
    if (host.empty()) host = "0.0.0.0";
  }
  int port = -1;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535)
    throw Error(ErrorCode::ConfigError, "bad listen address '" + address + "' (expected host:port)");
  return {host, port};
}

}  // namespace codetrail::store
