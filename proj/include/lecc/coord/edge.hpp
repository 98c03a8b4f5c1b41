// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>

#include "lecc/continual/engine.hpp"
#include "lecc/coord/transport.hpp"

namespace lecc::coord {

struct SubmitResult {
  bool accepted = false;
  /// REJECT reason when not accepted.
  std::string reason;
};

/// Node-side protocol client. The installed bundle is swapped atomically:
/// predictions see either the old or the new bundle, never a mix.
class EdgeClient {
 public:
  EdgeClient(std::uint32_t node_id, const model::Backbone& backbone, Channel& channel);

  /// HELLO handshake; applies the catch-up bundle when one is offered.
  /// Compatibility error on "incompatible-backbone".
  void register_node();
  SubmitResult submit(const lora::LoraAdapter& adapter, const std::string& metrics_json);
  /// Waits until the coordinator has published `round_id`, polling every
  /// `poll` up to `timeout`. Connection error on timeout.
  lora::AdapterBundle fetch_bundle(std::uint32_t round_id, std::chrono::milliseconds poll,
                                   std::chrono::milliseconds timeout);
  /// Installs `bundle` after fingerprint and ordering checks. An empty
  /// bundle is a no-op.
  void apply(lora::AdapterBundle bundle);

  std::shared_ptr<const lora::AdapterBundle> installed() const;
  std::vector<data::ClassId> predict(std::span<const continual::Sample> samples) const;

  std::uint32_t node_id() const noexcept { return node_id_; }

 private:
  Message expect(MessageType type);

  std::uint32_t node_id_;
  const model::Backbone* backbone_;
  std::uint32_t fingerprint_;
  Channel* channel_;
  mutable std::mutex mu_;
  std::shared_ptr<const lora::AdapterBundle> installed_;
};

}  // namespace lecc::coord
