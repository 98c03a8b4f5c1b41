// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/coord/wire.hpp"

#include <algorithm>

#include "lecc/error.hpp"
#include "lecc/lora/adapter.hpp"

namespace lecc::coord {

namespace {

constexpr std::string_view kMagic = "LECC";
constexpr std::size_t kHeaderBytes = 4 + 2 + 1 + 4 + 4 + 4;

bool known_type(std::uint8_t t) { return t >= 1 && t <= 6; }

}  // namespace

std::string_view message_type_name(MessageType type) noexcept {
  switch (type) {
    case MessageType::hello: return "HELLO";
    case MessageType::submit: return "SUBMIT";
    case MessageType::bundle: return "BUNDLE";
    case MessageType::ack: return "ACK";
    case MessageType::reject: return "REJECT";
    case MessageType::error: return "ERROR";
  }
  return "UNKNOWN";
}

Bytes encode_payload(const Message& m) {
  ByteWriter w;
  w.put_magic(kMagic);
  w.put_u16(kWireVersion);
  w.put_u8(static_cast<std::uint8_t>(m.type));
  w.put_u32(m.node_id);
  w.put_u32(m.round_id);
  w.put_u32(static_cast<std::uint32_t>(m.body.size()));
  w.put_bytes(m.body);
  w.put_crc();
  return w.take();
}

Bytes encode_frame(const Message& m) {
  const Bytes payload = encode_payload(m);
  if (payload.size() > kMaxPayload) fail(Errc::protocol, "message exceeds the frame size limit");
  const auto n = static_cast<std::uint32_t>(payload.size());
  Bytes frame{static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
              static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
  frame.resize(4 + payload.size());
  std::copy(payload.begin(), payload.end(), frame.begin() + 4);
  return frame;
}

Message decode_payload(std::span<const std::uint8_t> payload) {
  try {
    if (payload.size() < kHeaderBytes + 4) fail(Errc::protocol, "frame: truncated payload");
    ByteReader crc(payload, "frame");
    crc.bytes(payload.size() - 4);
    crc.expect_crc();

    ByteReader r(payload, "frame");
    r.expect_magic(kMagic);
    if (r.u16() != kWireVersion) fail(Errc::protocol, "frame: unsupported version");
    const std::uint8_t type = r.u8();
    if (!known_type(type)) fail(Errc::protocol, "frame: unknown message type " + std::to_string(type));
    Message m;
    m.type = static_cast<MessageType>(type);
    m.node_id = r.u32();
    m.round_id = r.u32();
    const std::uint32_t len = r.u32();
    if (len != r.remaining() - 4) fail(Errc::protocol, "frame: body length does not match the frame");
    const auto body = r.bytes(len);
    m.body.assign(body.begin(), body.end());
    return m;
  } catch (const Error& e) {
    if (e.code() == Errc::protocol) throw;
    fail(Errc::protocol, e.what());
  }
}

std::uint32_t frame_length(std::span<const std::uint8_t, 4> header) {
  ByteReader r(header, "frame");
  const std::uint32_t len = r.u32_be();
  if (len > kMaxPayload) fail(Errc::protocol, "frame length " + std::to_string(len) + " exceeds the limit");
  return len;
}

Message make_message(MessageType type, std::uint32_t node_id, std::uint32_t round_id, std::string_view text) {
  Message m{type, node_id, round_id, {}};
  m.body.assign(text.begin(), text.end());
  return m;
}

std::string body_text(const Message& m) { return {m.body.begin(), m.body.end()}; }

Bytes hello_body(std::uint32_t fingerprint) {
  ByteWriter w;
  w.put_u32(fingerprint);
  return w.take();
}

std::uint32_t parse_hello(const Message& m) {
  if (m.body.size() != 4) fail(Errc::protocol, "HELLO body must hold a 4-byte fingerprint");
  ByteReader r(m.body, "HELLO");
  return r.u32();
}

Bytes submit_body(std::span<const std::uint8_t> adapter, const std::string& metrics_json) {
  Bytes b(adapter.begin(), adapter.end());
  b.insert(b.end(), metrics_json.begin(), metrics_json.end());
  return b;
}

Submission parse_submit(const Message& m) {
  const std::size_t n = lora::encoded_length(m.body);
  if (n > m.body.size()) fail(Errc::format, "SUBMIT body shorter than its adapter");
  Submission s;
  s.adapter.assign(m.body.begin(), m.body.begin() + static_cast<std::ptrdiff_t>(n));
  s.metrics_json.assign(m.body.begin() + static_cast<std::ptrdiff_t>(n), m.body.end());
  return s;
}

}  // namespace lecc::coord
