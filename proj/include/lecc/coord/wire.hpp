// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "lecc/bytes.hpp"

namespace lecc::coord {

enum class MessageType : std::uint8_t {
  hello = 1,
  submit = 2,
  bundle = 3,
  ack = 4,
  reject = 5,
  error = 6,
};

std::string_view message_type_name(MessageType type) noexcept;

struct Message {
  MessageType type = MessageType::ack;
  std::uint32_t node_id = 0;
  std::uint32_t round_id = 0;
  Bytes body;

  bool operator==(const Message&) const = default;
};

inline constexpr std::uint16_t kWireVersion = 1;
/// Frames above this payload size are refused before allocation.
inline constexpr std::uint32_t kMaxPayload = 64u << 20;

/// Magic, version, type, node id, round id, body length, body, CRC-32.
Bytes encode_payload(const Message& message);
/// Big-endian payload length followed by the payload.
Bytes encode_frame(const Message& message);
/// Protocol error for bad magic, version, type, length or CRC.
Message decode_payload(std::span<const std::uint8_t> payload);

/// Reads the length prefix of a frame header (4 bytes, big-endian).
/// Protocol error above kMaxPayload.
std::uint32_t frame_length(std::span<const std::uint8_t, 4> header);

Message make_message(MessageType type, std::uint32_t node_id, std::uint32_t round_id,
                     std::string_view text = {});
std::string body_text(const Message& message);

// ---------------------------------------------------------------- bodies

/// HELLO body: the node's backbone fingerprint.
Bytes hello_body(std::uint32_t fingerprint);
std::uint32_t parse_hello(const Message& message);

struct Submission {
  Bytes adapter;
  std::string metrics_json;
};

/// SUBMIT body: adapter file bytes followed by the metrics JSON text.
Bytes submit_body(std::span<const std::uint8_t> adapter, const std::string& metrics_json);
/// Splits a SUBMIT body at the adapter's encoded length. Format error if the
/// adapter header is unreadable.
Submission parse_submit(const Message& message);

}  // namespace lecc::coord
