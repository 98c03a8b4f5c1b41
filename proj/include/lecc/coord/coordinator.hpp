// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lecc/continual/engine.hpp"
#include "lecc/coord/wire.hpp"
#include "lecc/lora/adapter.hpp"

namespace lecc::coord {

using data::ClassId;

/// REJECT reasons sent back to nodes.
inline constexpr std::string_view kIncompatibleBackbone = "incompatible-backbone";
inline constexpr std::string_view kBadChecksum = "bad-checksum";
inline constexpr std::string_view kAmbiguousOverlap = "ambiguous-overlap";
inline constexpr std::string_view kBadMetrics = "bad-metrics";
inline constexpr std::string_view kDuplicateSubmission = "duplicate-submission";

struct NodeRecord {
  std::uint32_t fingerprint = 0;
  /// Highest global round whose bundle this node has received.
  std::optional<std::uint32_t> delivered_round;
  /// Message counter value at the node's last contact (no wall clock, so
  /// runs stay reproducible).
  std::uint64_t last_contact = 0;
};

/// Holdout F1-drop gate.
struct ValidationGate {
  std::vector<continual::Sample> holdout;
  double epsilon = 0.02;
};

struct GateDecision {
  bool accepted = true;
  double f1_before = 0.0;
  double f1_after = 0.0;
};

/// Accepts the candidate iff adding it to `bundle` lowers macro-F1 on the
/// holdout samples of classes `bundle` already covers by at most ε. An
/// empty bundle or no matching holdout samples accepts.
GateDecision validate_candidate(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                                const lora::LoraAdapter& candidate, const ValidationGate& gate);

/// Element-wise mean of A, B and head parameters over adapters with
/// identical shapes and class lists, stamped with `round_id`.
lora::LoraAdapter average_adapters(std::span<const lora::LoraAdapter> adapters, std::uint32_t round_id);

struct ConsolidationResult {
  std::uint32_t round_id = 0;
  /// Adapters that entered the bundle, in insertion order.
  std::vector<lora::LoraAdapter> accepted;
  /// Node ids whose contribution the gate turned down.
  std::vector<std::uint32_t> gate_rejected;
};

/// The cloud coordination layer. Thread-safe: every message is handled in
/// one serialized critical section.
class Coordinator {
 public:
  /// `quorum`: distinct nodes whose submissions close a global round.
  Coordinator(model::Backbone backbone, ValidationGate gate, std::size_t quorum);

  /// Per-connection state.
  struct Session {
    std::optional<std::uint32_t> node_id;
  };

  struct Reply {
    std::vector<Message> messages;
    bool close = false;
  };

  /// Handles one raw frame payload. Malformed payloads yield ERROR + close
  /// and leave all state untouched.
  Reply handle(Session& session, std::span<const std::uint8_t> payload);
  Reply handle(Session& session, const Message& message);

  /// Aggregates, validates and publishes the pending submissions of
  /// `round_id`. State error if none are pending.
  ConsolidationResult consolidate(std::uint32_t round_id);

  std::uint32_t fingerprint() const noexcept { return fingerprint_; }
  lora::AdapterBundle bundle() const;
  std::optional<std::uint32_t> published_round() const;
  std::map<std::uint32_t, NodeRecord> registry() const;
  std::vector<ConsolidationResult> history() const;
  /// True once `round_id` is published and every registered node has
  /// received it.
  bool delivered_to_all(std::uint32_t round_id) const;

 private:
  struct Pending {
    std::uint32_t node_id = 0;
    lora::LoraAdapter adapter;
    std::string metrics_json;
  };

  Reply on_hello(Session& session, const Message& m);
  Reply on_submit(Session& session, const Message& m);
  Reply on_bundle(Session& session, const Message& m);
  ConsolidationResult consolidate_locked(std::uint32_t round_id);
  Message bundle_message(std::uint32_t node_id);

  mutable std::mutex mu_;
  model::Backbone backbone_;
  std::uint32_t fingerprint_;
  ValidationGate gate_;
  std::size_t quorum_;
  lora::AdapterBundle bundle_;
  std::optional<std::uint32_t> published_;
  std::map<std::uint32_t, NodeRecord> registry_;
  std::map<std::uint32_t, std::vector<Pending>> pending_;
  std::vector<ConsolidationResult> history_;
  std::uint64_t contacts_ = 0;
};

}  // namespace lecc::coord
