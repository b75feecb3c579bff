#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <ostream>
#include <stop_token>

#include "codetrail/capture/capture_session.hpp"
#include "codetrail/capture/delivery.hpp"

namespace codetrail::capture {

struct AgentStats {
  std::uint64_t captured = 0;
  std::uint64_t delivered = 0;
  std::uint64_t rejected = 0;
  DeliveryStatus last_status = DeliveryStatus::Ok;
};

/// `codetrail watch`: a watcher thread ticking a CaptureSession every poll_ms and a
/// sender thread flushing the spool every flush_interval_ms. They share nothing
/// but the spool.
///
/// After AuthRejected the sender stops sending until set_token() is called.
class Agent {
 public:
  Agent(WatchConfig config, std::unique_ptr<Transport> transport, std::ostream& log);

  /// Blocks until `stop` is requested, then emits pending diffs and makes a last
  /// delivery attempt.
  void run(std::stop_token stop);

  void set_token(std::string token);
  AgentStats stats() const;

 private:
  void watch_loop_with(CaptureSession& session, std::stop_token stop);
  void send_loop(std::stop_token stop);
  void log(const std::string& line);

  WatchConfig config_;
  Spool spool_;
  std::unique_ptr<Transport> transport_;
  std::ostream& log_;
  mutable std::mutex mutex_;  // token_, stats_, log_
  std::string token_;
  bool auth_blocked_ = false;
  AgentStats stats_;
};

}  // namespace codetrail::capture
