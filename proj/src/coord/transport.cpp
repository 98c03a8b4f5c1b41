// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/coord/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>

#include "lecc/error.hpp"

namespace lecc::coord {

namespace {

std::string sys_error() { return std::strerror(errno); }

bool write_all(int fd, std::span<const std::uint8_t> data) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<std::size_t>(n);
  }
  return true;
}

bool read_all(int fd, std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    const ssize_t n = ::recv(fd, out.data() + done, out.size() - done, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    done += static_cast<std::size_t>(n);
  }
  return true;
}

/// Reads one frame payload; nullopt on a closed or broken stream, protocol
/// error on an oversized length prefix.
std::optional<Bytes> read_frame(int fd) {
  std::array<std::uint8_t, 4> header{};
  if (!read_all(fd, header)) return std::nullopt;
  const std::uint32_t len = frame_length(header);
  Bytes payload(len);
  if (!read_all(fd, payload)) return std::nullopt;
  return payload;
}

sockaddr_in make_address(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
    fail(Errc::connection, "cannot resolve host " + ep.host);
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

}  // namespace

Endpoint parse_endpoint(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    fail(Errc::config, "endpoint must look like host:port, got '" + text + "'");
  }
  unsigned port = 0;
  const char* first = text.data() + colon + 1;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, port);
  if (ec != std::errc() || ptr != last || port > 65535) fail(Errc::config, "bad port in endpoint '" + text + "'");
  return Endpoint{text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

Endpoint resolve_endpoint(const std::optional<std::string>& flag) {
  if (flag) return parse_endpoint(*flag);
  if (const char* env = std::getenv("LECC_ADDR"); env != nullptr && *env != '\0') return parse_endpoint(env);
  return Endpoint{};
}

// ---------------------------------------------------------------- loopback

void LoopbackChannel::send(const Message& message) { send_frame(encode_frame(message)); }

void LoopbackChannel::send_frame(std::span<const std::uint8_t> frame) {
  if (closed_) fail(Errc::connection, "loopback connection closed by the coordinator");
  Coordinator::Reply reply;
  if (frame.size() < 4 || frame_length(frame.first<4>()) != frame.size() - 4) {
    reply.messages.push_back(make_message(MessageType::error, 0, 0, "frame length does not match its payload"));
    reply.close = true;
  } else {
    reply = coordinator_->handle(session_, frame.subspan(4));
  }
  for (const auto& m : reply.messages) {
    const Bytes f = encode_frame(m);
    inbox_.emplace_back(f.begin() + 4, f.end());
  }
  closed_ = reply.close;
}

Message LoopbackChannel::receive() {
  if (inbox_.empty()) fail(Errc::connection, "no reply from the coordinator");
  Bytes payload = std::move(inbox_.front());
  inbox_.pop_front();
  return decode_payload(payload);
}

// ---------------------------------------------------------------- TCP client

TcpChannel::TcpChannel(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  const sockaddr_in addr = make_address(endpoint);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string last_error;
  while (true) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) fail(Errc::connection, "socket: " + sys_error());
    if (::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) break;
    last_error = sys_error();
    ::close(fd_);
    fd_ = -1;
    if (std::chrono::steady_clock::now() >= deadline) {
      fail(Errc::connection, "cannot reach coordinator at " + endpoint.to_string() + ": " + last_error);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpChannel::send(const Message& message) { send_frame(encode_frame(message)); }

void TcpChannel::send_frame(std::span<const std::uint8_t> frame) {
  if (!write_all(fd_, frame)) fail(Errc::connection, "send failed: connection closed");
}

Message TcpChannel::receive() {
  auto payload = read_frame(fd_);
  if (!payload) fail(Errc::connection, "connection closed by the coordinator");
  return decode_payload(*payload);
}

// ---------------------------------------------------------------- TCP server

TcpServer::TcpServer(Coordinator& coordinator, const Endpoint& endpoint) : coordinator_(&coordinator) {
  const sockaddr_in addr = make_address(endpoint);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) fail(Errc::bind, "socket: " + sys_error());
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    const std::string why = sys_error();
    ::close(listen_fd_);
    fail(Errc::bind, "cannot listen on " + endpoint.to_string() + ": " + why);
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

std::size_t TcpServer::open_connections() const {
  std::lock_guard lock(mu_);
  return open_fds_.size();
}

void TcpServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::list<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void TcpServer::accept_loop() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      return;
    }
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void TcpServer::serve_connection(int fd) {
  Coordinator::Session session;
  while (!stopping_) {
    Coordinator::Reply reply;
    try {
      auto payload = read_frame(fd);
      if (!payload) break;
      reply = coordinator_->handle(session, *payload);
    } catch (const std::exception& e) {
      // Anything unexpected still ends in ERROR + close, never a crash.
      reply.messages = {make_message(MessageType::error, session.node_id.value_or(0), 0, e.what())};
      reply.close = true;
    }
    bool ok = true;
    for (const auto& m : reply.messages) ok = ok && write_all(fd, encode_frame(m));
    if (!ok || reply.close) break;
  }
  std::lock_guard lock(mu_);
  open_fds_.remove(fd);
  ::close(fd);
}

}  // namespace lecc::coord
