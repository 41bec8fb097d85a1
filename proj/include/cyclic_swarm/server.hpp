#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "cyclic_swarm/session.hpp"

namespace cyclic_swarm {

struct ServerOptions {
  std::string address{"127.0.0.1"};
  std::uint16_t port{0};  // 0 picks a free port
  /// Wall-clock time between ticks. Each tick drains commands, advances the
  /// session and broadcasts one snapshot.
  std::chrono::milliseconds tick_period{50};
  /// Outgoing messages buffered per client before it is dropped.
  std::size_t max_backlog{1024};
  /// Stop cleanly on SIGINT / SIGTERM.
  bool handle_signals{false};
};

/// Serves one Session on a TCP port. A client either speaks line-delimited
/// JSON directly or upgrades via "GET /session" to a WebSocket carrying the
/// same messages as text frames. All session access happens on the single
/// thread that calls run().
class SessionServer {
 public:
  /// Binds immediately; throws IoError if the address is unavailable.
  SessionServer(Session& session, ServerOptions options);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  std::uint16_t port() const;
  /// Blocks until stop().
  void run();
  /// Safe from any thread.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cyclic_swarm
