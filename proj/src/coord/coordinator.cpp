// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/coord/coordinator.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"
#include "lecc/error.hpp"

namespace lecc::coord {

namespace {

bool disjoint(const std::vector<ClassId>& a, const std::vector<ClassId>& b) {
  std::vector<ClassId> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  return both.empty();
}

Coordinator::Reply single(Message m, bool close = false) {
  Coordinator::Reply r;
  r.messages.push_back(std::move(m));
  r.close = close;
  return r;
}

Coordinator::Reply protocol_error(std::uint32_t node_id, const std::string& what) {
  return single(make_message(MessageType::error, node_id, 0, what), true);
}

Coordinator::Reply reject(const Message& m, std::string_view reason) {
  return single(make_message(MessageType::reject, m.node_id, m.round_id, reason));
}

void average_into(nn::Matrix& acc, const nn::Matrix& v, std::vector<double>& sum) {
  if (!acc.same_shape(v)) fail(Errc::adapter, "cannot average adapters of different shapes");
  const auto vals = v.values();
  for (std::size_t i = 0; i < vals.size(); ++i) sum[i] += vals[i];
}

}  // namespace

GateDecision validate_candidate(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                                const lora::LoraAdapter& candidate, const ValidationGate& gate) {
  GateDecision d;
  const auto known = bundle.known_classes();
  if (known.empty()) return d;
  std::vector<continual::Sample> subset;
  for (const auto& s : gate.holdout)
    if (std::binary_search(known.begin(), known.end(), s.label)) subset.push_back(s);
  if (subset.empty()) return d;
  std::vector<ClassId> truth;
  for (const auto& s : subset) truth.push_back(s.label);

  lora::AdapterBundle with = bundle;
  with.add(candidate);
  d.f1_before = continual::truth_macro_f1(truth, continual::predict_bundle(backbone, bundle, subset));
  d.f1_after = continual::truth_macro_f1(truth, continual::predict_bundle(backbone, with, subset));
  d.accepted = d.f1_before - d.f1_after <= gate.epsilon;
  return d;
}

lora::LoraAdapter average_adapters(std::span<const lora::LoraAdapter> adapters, std::uint32_t round_id) {
  if (adapters.empty()) fail(Errc::state, "nothing to average");
  const lora::LoraAdapter& first = adapters.front();
  for (const auto& a : adapters) {
    if (a.classes() != first.classes()) fail(Errc::adapter, "averaged adapters must cover identical classes");
    if (a.backbone_fingerprint != first.backbone_fingerprint) {
      fail(Errc::compatibility, "averaged adapters were trained against different backbones");
    }
    if (a.config.rank != first.config.rank || a.config.alpha != first.config.alpha ||
        a.entries.size() != first.entries.size()) {
      fail(Errc::adapter, "averaged adapters must share their LoRA configuration");
    }
    for (std::size_t e = 0; e < a.entries.size(); ++e) {
      if (a.entries[e].layer != first.entries[e].layer || a.entries[e].target != first.entries[e].target) {
        fail(Errc::adapter, "averaged adapters must target the same projections");
      }
    }
  }
  lora::LoraAdapter out = first;
  out.round_id = round_id;
  const double n = static_cast<double>(adapters.size());
  auto mean = [&](nn::Matrix& dst, auto pick) {
    std::vector<double> sum(dst.size(), 0.0);
    for (const auto& a : adapters) average_into(dst, pick(a), sum);
    auto vals = dst.values();
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = static_cast<float>(sum[i] / n);
  };
  for (std::size_t e = 0; e < out.entries.size(); ++e) {
    mean(out.entries[e].a.value, [e](const lora::LoraAdapter& a) -> const nn::Matrix& { return a.entries[e].a.value; });
    mean(out.entries[e].b.value, [e](const lora::LoraAdapter& a) -> const nn::Matrix& { return a.entries[e].b.value; });
  }
  mean(out.head.weight.value, [](const lora::LoraAdapter& a) -> const nn::Matrix& { return a.head.weight.value; });
  mean(out.head.bias.value, [](const lora::LoraAdapter& a) -> const nn::Matrix& { return a.head.bias.value; });
  return out;
}

Coordinator::Coordinator(model::Backbone backbone, ValidationGate gate, std::size_t quorum)
    : backbone_(std::move(backbone)),
      fingerprint_(model::backbone_fingerprint(backbone_)),
      gate_(std::move(gate)),
      quorum_(quorum) {
  if (quorum_ == 0) fail(Errc::config, "coordinator quorum must be at least 1");
  backbone_.set_frozen(true);
  bundle_.backbone_fingerprint = fingerprint_;
}

Coordinator::Reply Coordinator::handle(Session& session, std::span<const std::uint8_t> payload) {
  Message m;
  try {
    m = decode_payload(payload);
  } catch (const Error& e) {
    return protocol_error(session.node_id.value_or(0), e.what());
  }
  return handle(session, m);
}

Coordinator::Reply Coordinator::handle(Session& session, const Message& m) {
  std::lock_guard lock(mu_);
  try {
    switch (m.type) {
      case MessageType::hello: return on_hello(session, m);
      case MessageType::submit: return on_submit(session, m);
      case MessageType::bundle: return on_bundle(session, m);
      default: return protocol_error(m.node_id, std::string("unexpected ") + std::string(message_type_name(m.type)));
    }
  } catch (const Error& e) {
    if (e.code() == Errc::protocol) return protocol_error(m.node_id, e.what());
    throw;
  }
}

Coordinator::Reply Coordinator::on_hello(Session& session, const Message& m) {
  const std::uint32_t fp = parse_hello(m);
  if (fp != fingerprint_) return reject(m, kIncompatibleBackbone);
  if (session.node_id && *session.node_id != m.node_id) {
    return protocol_error(m.node_id, "session already registered as another node");
  }
  session.node_id = m.node_id;
  NodeRecord& rec = registry_[m.node_id];
  rec.fingerprint = fp;
  rec.last_contact = ++contacts_;
  Reply r;
  r.messages.push_back(make_message(MessageType::ack, m.node_id, m.round_id));
  // Catch-up: a late joiner receives the full historical bundle right away.
  r.messages.push_back(bundle_message(m.node_id));
  return r;
}

Coordinator::Reply Coordinator::on_submit(Session& session, const Message& m) {
  if (!session.node_id || *session.node_id != m.node_id) {
    return protocol_error(m.node_id, "SUBMIT before HELLO");
  }
  registry_[m.node_id].last_contact = ++contacts_;
  Submission sub;
  try {
    sub = parse_submit(m);
  } catch (const Error&) {
    return reject(m, kBadChecksum);
  }
  if (!lora::has_valid_crc(sub.adapter)) return reject(m, kBadChecksum);
  lora::LoraAdapter adapter;
  try {
    adapter = lora::deserialize(sub.adapter);
  } catch (const Error&) {
    return reject(m, kBadChecksum);
  }
  if (adapter.backbone_fingerprint != fingerprint_) return reject(m, kIncompatibleBackbone);
  if (adapter.round_id != m.round_id) return reject(m, "round-mismatch");
  if (published_ && m.round_id <= *published_) return reject(m, "round-closed");
  if (!nlohmann::json::accept(sub.metrics_json)) return reject(m, kBadMetrics);

  auto& list = pending_[m.round_id];
  for (const auto& p : list) {
    if (p.node_id == m.node_id) return reject(m, kDuplicateSubmission);
    if (p.adapter.classes() != adapter.classes() && !disjoint(p.adapter.classes(), adapter.classes())) {
      return reject(m, kAmbiguousOverlap);
    }
  }
  list.push_back(Pending{m.node_id, std::move(adapter), std::move(sub.metrics_json)});
  if (list.size() >= quorum_) consolidate_locked(m.round_id);
  return single(make_message(MessageType::ack, m.node_id, m.round_id));
}

Coordinator::Reply Coordinator::on_bundle(Session& session, const Message& m) {
  if (!session.node_id || *session.node_id != m.node_id) {
    return protocol_error(m.node_id, "BUNDLE request before HELLO");
  }
  registry_[m.node_id].last_contact = ++contacts_;
  if (!published_ || *published_ < m.round_id) {
    return single(make_message(MessageType::ack, m.node_id, m.round_id, "pending"));
  }
  return single(bundle_message(m.node_id));
}

Message Coordinator::bundle_message(std::uint32_t node_id) {
  Message out{MessageType::bundle, node_id, published_.value_or(0), lora::encode_bundle(bundle_)};
  if (published_) registry_[node_id].delivered_round = *published_;
  return out;
}

ConsolidationResult Coordinator::consolidate(std::uint32_t round_id) {
  std::lock_guard lock(mu_);
  return consolidate_locked(round_id);
}

ConsolidationResult Coordinator::consolidate_locked(std::uint32_t round_id) {
  auto it = pending_.find(round_id);
  if (it == pending_.end() || it->second.empty()) {
    fail(Errc::state, "no pending submissions for round " + std::to_string(round_id));
  }
  // Arrival order never matters: submissions are processed by node id, and
  // identical class sets form one averaging group.
  std::vector<Pending> subs = std::move(it->second);
  pending_.erase(it);
  std::sort(subs.begin(), subs.end(), [](const Pending& a, const Pending& b) { return a.node_id < b.node_id; });
  std::vector<std::vector<const Pending*>> groups;
  for (const auto& s : subs) {
    auto g = std::find_if(groups.begin(), groups.end(),
                          [&](const auto& grp) { return grp.front()->adapter.classes() == s.adapter.classes(); });
    if (g == groups.end()) {
      groups.push_back({&s});
    } else {
      g->push_back(&s);
    }
  }

  ConsolidationResult res;
  res.round_id = round_id;
  const lora::AdapterBundle before = bundle_;
  for (const auto& grp : groups) {
    lora::LoraAdapter candidate;
    if (grp.size() == 1) {
      candidate = grp.front()->adapter;
    } else {
      std::vector<lora::LoraAdapter> members;
      for (const Pending* p : grp) members.push_back(p->adapter);
      candidate = average_adapters(members, round_id);
    }
    if (validate_candidate(backbone_, before, candidate, gate_).accepted) {
      bundle_.add(candidate);
      res.accepted.push_back(std::move(candidate));
    } else {
      for (const Pending* p : grp) res.gate_rejected.push_back(p->node_id);
    }
  }
  published_ = round_id;
  history_.push_back(res);
  return res;
}

lora::AdapterBundle Coordinator::bundle() const {
  std::lock_guard lock(mu_);
  return bundle_;
}

std::optional<std::uint32_t> Coordinator::published_round() const {
  std::lock_guard lock(mu_);
  return published_;
}

std::map<std::uint32_t, NodeRecord> Coordinator::registry() const {
  std::lock_guard lock(mu_);
  return registry_;
}

std::vector<ConsolidationResult> Coordinator::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

bool Coordinator::delivered_to_all(std::uint32_t round_id) const {
  std::lock_guard lock(mu_);
  if (!published_ || *published_ < round_id || registry_.empty()) return false;
  return std::all_of(registry_.begin(), registry_.end(), [&](const auto& kv) {
    return kv.second.delivered_round && *kv.second.delivered_round >= round_id;
  });
}

}  // namespace lecc::coord
