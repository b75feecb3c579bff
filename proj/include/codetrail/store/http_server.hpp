#pragma once

#include <memory>
#include <string>
#include <utility>

#include "codetrail/store/ingest.hpp"

namespace codetrail::store {

/// HTTP front of the ingest service.
///
///   POST /v1/events   NDJSON body, `Authorization: Bearer <token>`, replies with the
///                     IngestReceipt JSON (401 bad token, 413 body over the cap,
///                     400 body that is not NDJSON).
///   GET  /v1/events   `actor`, `workspace`, `exercise`, `kind` (comma list), `from`,
///                     `to`, `from_seq`, `to_seq`; replies NDJSON of StoredEvent. An
///                     actor token only ever sees its own events.
///   GET  /v1/health   status JSON.
///
/// Any other method on /v1/events answers 405: the log has no update or delete.
class HttpServer {
 public:
  explicit HttpServer(IngestService& ingest);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and returns the port (an ephemeral one when `port` is 0), or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits `host:port`; a bare port means 127.0.0.1. Throws Error{ConfigError}.
std::pair<std::string, int> parse_listen_address(const std::string& address);

}  // namespace codetrail::store
