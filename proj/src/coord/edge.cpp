// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/coord/edge.hpp"

#include <thread>

#include "lecc/error.hpp"

namespace lecc::coord {

EdgeClient::EdgeClient(std::uint32_t node_id, const model::Backbone& backbone, Channel& channel)
    : node_id_(node_id),
      backbone_(&backbone),
      fingerprint_(model::backbone_fingerprint(backbone)),
      channel_(&channel),
      installed_(std::make_shared<lora::AdapterBundle>()) {}

Message EdgeClient::expect(MessageType type) {
  Message m = channel_->receive();
  if (m.type == MessageType::error) fail(Errc::protocol, "coordinator error: " + body_text(m));
  if (m.type != type && m.type != MessageType::reject) {
    fail(Errc::protocol, "expected " + std::string(message_type_name(type)) + ", got " +
                             std::string(message_type_name(m.type)));
  }
  return m;
}

void EdgeClient::register_node() {
  Message hello{MessageType::hello, node_id_, 0, hello_body(fingerprint_)};
  channel_->send(hello);
  const Message ack = expect(MessageType::ack);
  if (ack.type == MessageType::reject) {
    fail(Errc::compatibility, "coordinator rejected node " + std::to_string(node_id_) + ": " + body_text(ack));
  }
  const Message catch_up = expect(MessageType::bundle);
  apply(lora::decode_bundle(catch_up.body));
}

SubmitResult EdgeClient::submit(const lora::LoraAdapter& adapter, const std::string& metrics_json) {
  Message m{MessageType::submit, node_id_, adapter.round_id, submit_body(lora::serialize(adapter), metrics_json)};
  channel_->send(m);
  const Message reply = expect(MessageType::ack);
  if (reply.type == MessageType::reject) return {false, body_text(reply)};
  return {true, {}};
}

lora::AdapterBundle EdgeClient::fetch_bundle(std::uint32_t round_id, std::chrono::milliseconds poll,
                                             std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    channel_->send(make_message(MessageType::bundle, node_id_, round_id));
    const Message reply = channel_->receive();
    if (reply.type == MessageType::bundle) return lora::decode_bundle(reply.body);
    if (reply.type != MessageType::ack) {
      fail(Errc::protocol, "bundle request answered with " + std::string(message_type_name(reply.type)) + ": " +
                               body_text(reply));
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      fail(Errc::connection, "round " + std::to_string(round_id) + " was not published in time");
    }
    std::this_thread::sleep_for(poll);
  }
}

void EdgeClient::apply(lora::AdapterBundle bundle) {
  if (bundle.empty()) return;
  if (bundle.backbone_fingerprint != fingerprint_) {
    fail(Errc::compatibility, "bundle was built for a different backbone");
  }
  lora::validate_bundle(bundle);
  auto next = std::make_shared<const lora::AdapterBundle>(std::move(bundle));
  std::lock_guard lock(mu_);
  installed_ = std::move(next);
}

std::shared_ptr<const lora::AdapterBundle> EdgeClient::installed() const {
  std::lock_guard lock(mu_);
  return installed_;
}

std::vector<data::ClassId> EdgeClient::predict(std::span<const continual::Sample> samples) const {
  const auto snapshot = installed();
  return continual::predict_bundle(*backbone_, *snapshot, samples);
}

}  // namespace lecc::coord
