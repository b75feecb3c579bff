#include "codetrail/capture/agent.hpp"

#include <condition_variable>
#include <thread>

#include "codetrail/error.hpp"

namespace codetrail::capture {

namespace {

// Sleeps up to `ms`, waking early on stop.
void nap(std::stop_token stop, std::int64_t ms) {
  std::mutex m;
  std::condition_variable_any cv;
  std::unique_lock lock(m);
  cv.wait_for(lock, stop, std::chrono::milliseconds(ms), [] { return false; });
}

}  // namespace

Agent::Agent(WatchConfig config, std::unique_ptr<Transport> transport, std::ostream& log)
    : config_(std::move(config)),
      spool_(config_.spool_dir, SpoolOptions{config_.spool_max_bytes, true}),
      transport_(std::move(transport)),
      log_(log),
      token_(config_.auth_token) {}

void Agent::log(const std::string& line) {
  std::lock_guard lock(mutex_);
  log_ << Timestamp::now().to_string() << ' ' << line << '\n' << std::flush;
}

void Agent::set_token(std::string token) {
  std::lock_guard lock(mutex_);
  token_ = std::move(token);
  auth_blocked_ = false;
}

AgentStats Agent::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

void Agent::run(std::stop_token stop) {
  CaptureSession session(config_, spool_);  // throws before any thread starts
  std::jthread sender([this](std::stop_token s) { send_loop(s); });
  watch_loop_with(session, stop);
  sender.request_stop();
  sender.join();
  FlushOptions options;
  {
    std::lock_guard lock(mutex_);
    if (auth_blocked_) return;
    options.token = token_;
  }
  options.batch_size = config_.batch_size;
  options.retry.max_attempts = 2;
  const auto receipt = flush(spool_, *transport_, options);
  log("final flush: " + std::string(to_string(receipt.status)) + ", acked " + std::to_string(receipt.acked) +
      ", pending " + std::to_string(spool_.pending_count()));
}

void Agent::watch_loop_with(CaptureSession& session, std::stop_token stop) {
  while (!stop.stop_requested()) {
    try {
      const auto events = session.tick();
      for (const auto& e : session.io_errors()) log("io error: " + e.file + ": " + e.message);
      if (auto err = session.last_spool_error()) log("spool: " + *err + " (buffering in memory)");
      std::lock_guard lock(mutex_);
      stats_.captured += events.size();
    } catch (const Error& err) {
      log(std::string("watch: ") + err.what());
    }
    nap(stop, config_.poll_ms);
  }
  const auto tail = session.flush_pending();
  std::lock_guard lock(mutex_);
  stats_.captured += tail.size();
}

void Agent::send_loop(std::stop_token stop) {
  while (!stop.stop_requested()) {
    nap(stop, config_.flush_interval_ms);
    if (stop.stop_requested()) break;
    FlushOptions options;
    {
      std::lock_guard lock(mutex_);
      if (auth_blocked_) continue;
      options.token = token_;
    }
    options.batch_size = config_.batch_size;
    options.retry.sleep = [&stop](std::int64_t ms) { nap(stop, ms); };
    DeliveryReceipt receipt;
    try {
      receipt = flush(spool_, *transport_, options);
    } catch (const Error& err) {
      log(std::string("send: ") + err.what());
      continue;
    }
    {
      std::lock_guard lock(mutex_);
      stats_.delivered += receipt.acked;
      stats_.rejected += receipt.rejected;
      stats_.last_status = receipt.status;
      if (receipt.status == DeliveryStatus::AuthRejected) auth_blocked_ = true;
    }
    if (receipt.status != DeliveryStatus::Ok)
      log("send: " + std::string(to_string(receipt.status)) + ": " + receipt.message);
  }
}

}  // namespace codetrail::capture
