#include <httplib.h>

#include "codetrail/capture/delivery.hpp"
#include "codetrail/error.hpp"

namespace codetrail::capture {

struct HttpTransport::Impl {
  explicit Impl(const std::string& url) : client(url) {}
  httplib::Client client;
};

HttpTransport::HttpTransport(const std::string& server_url, std::int64_t timeout_ms) {
  if (server_url.empty()) throw Error(ErrorCode::ConfigError, "server_url is empty");
  impl_ = std::make_unique<Impl>(server_url);
  if (!impl_->client.is_valid()) throw Error(ErrorCode::ConfigError, "unsupported server_url: " + server_url);
  const auto t = std::chrono::milliseconds(timeout_ms);
  impl_->client.set_connection_timeout(t);
  impl_->client.set_read_timeout(t);
  impl_->client.set_write_timeout(t);
}

HttpTransport::~HttpTransport() = default;

TransportResponse HttpTransport::post_events(const std::string& body, const std::string& token) {
  httplib::Headers headers{{"Authorization", "Bearer " + token}};
  auto res = impl_->client.Post("/v1/events", headers, body, "application/x-ndjson");
  if (!res) return {0, {}, httplib::to_string(res.error())};
  return {res->status, res->body, {}};
}

}  // namespace codetrail::capture
