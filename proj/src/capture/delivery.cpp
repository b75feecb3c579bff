#include "codetrail/capture/delivery.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <set>
#include <thread>

#include "codetrail/error.hpp"
#include "codetrail/event/canonical.hpp"
#include "codetrail/store/ingest.hpp"

namespace codetrail::capture {

namespace {

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

std::string batch_body(const std::vector<SpoolEntry>& batch) {
  std::string body;
  for (const auto& entry : batch) {
    body += encode_event(entry.event);
    body += '\n';
  }
  return body;
}

}  // namespace

std::int64_t RetryPolicy::nominal_delay(int attempt) const {
  std::int64_t d = base_ms;
  for (int i = 0; i < attempt && d < max_ms; ++i) d *= 2;
  return std::min(d, max_ms);
}

std::string_view to_string(DeliveryStatus status) {
  switch (status) {
    case DeliveryStatus::Ok: return "Ok";
    case DeliveryStatus::AuthRejected: return "AuthRejected";
    case DeliveryStatus::ServerUnavailable: return "ServerUnavailable";
    case DeliveryStatus::PartialAccept: return "PartialAccept";
  }
  return "?";
}

DeliveryReceipt flush(Spool& spool, Transport& transport, const FlushOptions& options) {
  DeliveryReceipt receipt;
  std::mt19937_64 rng(options.retry.seed);
  auto sleep = options.retry.sleep ? options.retry.sleep : [](std::int64_t ms) {
    std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  };
  auto stage = [&](FlushStage s) {
    if (options.hook) options.hook(s);
  };
  std::size_t batch_size = std::max<std::size_t>(1, options.batch_size);
  std::uint64_t counted_through = 0;  // spool indices below this were already counted in `sent`

  for (;;) {
    const auto batch = spool.pending(batch_size);
    if (batch.empty()) return receipt;
    const std::string body = batch_body(batch);
    for (const auto& entry : batch)
      if (entry.index >= counted_through) ++receipt.sent;
    counted_through = std::max(counted_through, batch.back().index + 1);

    stage(FlushStage::BeforeSend);
    TransportResponse response;
    for (int attempt = 0;; ++attempt) {
      response = transport.post_events(body, options.token);
      if (!retryable(response.status)) break;
      if (attempt + 1 >= options.retry.max_attempts) {
        receipt.status = DeliveryStatus::ServerUnavailable;
        receipt.message = response.status == 0 ? response.error : "HTTP " + std::to_string(response.status);
        return receipt;
      }
      const std::int64_t d = options.retry.nominal_delay(attempt);
      const auto low = static_cast<std::int64_t>(static_cast<double>(d) * (1.0 - options.retry.jitter));
      sleep(std::uniform_int_distribution<std::int64_t>(low, d)(rng));
    }
    stage(FlushStage::AfterResponse);

    if (response.status == 401 || response.status == 403) {
      receipt.status = DeliveryStatus::AuthRejected;
      receipt.message = response.body;
      return receipt;
    }
    if (response.status == 413 || response.status == 400) {
      if (batch.size() > 1) {
        batch_size = std::max<std::size_t>(1, batch.size() / 2);
        continue;
      }
      spool.record_rejection(batch.front().event, "HTTP " + std::to_string(response.status) + " " + response.body);
      spool.ack_through(batch.front().index + 1);
      ++receipt.rejected;
      stage(FlushStage::AfterAck);
      continue;
    }
    if (response.status != 200) {
      receipt.status = DeliveryStatus::ServerUnavailable;
      receipt.message = "unexpected HTTP " + std::to_string(response.status);
      return receipt;
    }

    store::IngestReceipt server;
    try {
      server = store::receipt_from_json(json::parse(response.body));
    } catch (const std::exception& ex) {
      receipt.status = DeliveryStatus::ServerUnavailable;
      receipt.message = std::string("unreadable receipt: ") + ex.what();
      return receipt;
    }
    std::set<std::string, std::less<>> named(server.duplicates.begin(), server.duplicates.end());
    for (const auto& [id, seq] : server.accepted) named.insert(id);
    std::map<std::string, std::string, std::less<>> refused;
    for (const auto& r : server.rejected) {
      std::string why;
      for (const auto& v : r.violations) why += (why.empty() ? "" : ", ") + std::string(to_string(v.code));
      refused.emplace(r.ref, why);
    }

    std::size_t prefix = 0;
    for (const auto& entry : batch) {
      if (named.count(entry.event.event_id)) {
        ++receipt.acked;
      } else if (auto it = refused.find(entry.event.event_id); it != refused.end()) {
        spool.record_rejection(entry.event, it->second);
        ++receipt.rejected;
      } else {
        break;
      }
      ++prefix;
    }
    if (prefix > 0) spool.ack_through(batch[prefix - 1].index + 1);
    stage(FlushStage::AfterAck);
    if (prefix < batch.size()) {
      receipt.status = DeliveryStatus::PartialAccept;
      receipt.message = std::to_string(batch.size() - prefix) + " entries not named by the server receipt";
      return receipt;
    }
  }
}

}  // namespace codetrail::capture
