// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "lecc/coord/coordinator.hpp"
#include "lecc/coord/wire.hpp"

namespace lecc::coord {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7878;

  std::string to_string() const { return host + ":" + std::to_string(port); }
};

/// "host:port"; config error otherwise.
Endpoint parse_endpoint(const std::string& text);
/// The --addr value when given, else $LECC_ADDR, else 127.0.0.1:7878.
Endpoint resolve_endpoint(const std::optional<std::string>& flag);

/// One client connection carrying whole messages.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Message& message) = 0;
  /// Next message from the coordinator; connection error once closed.
  virtual Message receive() = 0;
};

/// In-process channel: frames are encoded and decoded exactly as on a
/// socket, then handed straight to the coordinator.
class LoopbackChannel : public Channel {
 public:
  explicit LoopbackChannel(Coordinator& coordinator) : coordinator_(&coordinator) {}
  void send(const Message& message) override;
  /// Delivers raw frame bytes, for tests that corrupt frames in flight.
  void send_frame(std::span<const std::uint8_t> frame);
  Message receive() override;

 private:
  Coordinator* coordinator_;
  Coordinator::Session session_;
  std::deque<Bytes> inbox_;
  bool closed_ = false;
};

/// Blocking TCP client channel.
class TcpChannel : public Channel {
 public:
  /// Retries refused connections until `timeout` elapses, then throws a
  /// connection error.
  TcpChannel(const Endpoint& endpoint, std::chrono::milliseconds timeout);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  void send(const Message& message) override;
  void send_frame(std::span<const std::uint8_t> frame);
  Message receive() override;

 private:
  int fd_ = -1;
};

/// Serves a coordinator over TCP, one thread per connection.
class TcpServer {
 public:
  TcpServer(Coordinator& coordinator, const Endpoint& endpoint);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  /// Actual bound port (useful with port 0).
  std::uint16_t port() const noexcept { return port_; }
  /// Connections accepted and not yet closed.
  std::size_t open_connections() const;
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd);

  Coordinator* coordinator_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  mutable std::mutex mu_;
  std::list<std::thread> workers_;
  std::list<int> open_fds_;
};

}  // namespace lecc::coord
