#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "codetrail/capture/spool.hpp"

namespace codetrail::capture {

/// status 0 means the request never got an HTTP response.
struct TransportResponse {
  int status = 0;
  std::string body;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// POSTs an NDJSON batch to `/v1/events`.
  virtual TransportResponse post_events(const std::string& body, const std::string& token) = 0;
};

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(const std::string& server_url, std::int64_t timeout_ms = 10000);
  ~HttpTransport() override;
  TransportResponse post_events(const std::string& body, const std::string& token) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Capped exponential backoff; each delay is drawn from [(1-jitter)·d, d] where
/// d = min(max_ms, base_ms·2^attempt).
struct RetryPolicy {
  int max_attempts = 5;
  std::int64_t base_ms = 250;
  std::int64_t max_ms = 30000;
  double jitter = 0.5;
  std::uint64_t seed = 0x5eed;
  std::function<void(std::int64_t)> sleep;  // defaults to sleeping the thread

  std::int64_t nominal_delay(int attempt) const;
};

enum class FlushStage { BeforeSend, AfterResponse, AfterAck };
/// Called at each stage of every batch; throwing from it aborts the flush.
using FlushHook = std::function<void(FlushStage)>;

enum class DeliveryStatus { Ok, AuthRejected, ServerUnavailable, PartialAccept };
std::string_view to_string(DeliveryStatus status);

struct DeliveryReceipt {
  std::size_t sent = 0;      // entries put on the wire, each counted once per flush
  std::size_t acked = 0;     // entries the server named as accepted or duplicate
  std::size_t rejected = 0;  // entries the server refused as invalid; dead-lettered
  DeliveryStatus status = DeliveryStatus::Ok;
  std::string message;
};

struct FlushOptions {
  std::string token;
  std::size_t batch_size = 200;
  RetryPolicy retry;
  FlushHook hook;
};

/// Sends the oldest pending spool entries in batches until the spool is drained or
/// delivery stops.
///
/// Entries are acked in spool order and only once the server's receipt names
/// them. Entries it rejects as invalid are written to the spool's dead-letter log
/// and acked so they do not block the queue. A 413 or 400 for the whole batch
/// halves the batch size; a single entry that still fails is dead-lettered.
DeliveryReceipt flush(Spool& spool, Transport& transport, const FlushOptions& options);

}  // namespace codetrail::capture
