// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <thread>

#include "doctest.h"
#include "lecc/continual/experiment.hpp"
#include "lecc/coord/edge.hpp"
#include "lecc/coord/global.hpp"
#include "lecc/coord/transport.hpp"
#include "lecc/coord/wire.hpp"
#include "lecc/error.hpp"
#include "toy.hpp"

using namespace lecc;
using namespace lecc::coord;
using namespace lecc::testing;
using namespace std::chrono_literals;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an lecc::Error");
  return Errc::state;
}

// Adapter with non-zero B so it changes logits.
lora::LoraAdapter make_adapter(const model::Backbone& bb, std::uint32_t round, std::vector<ClassId> classes,
                               std::uint64_t seed) {
  lora::LoraAdapter a = lora::init_adapter(toy_lora(), bb, round, classes, seed);
  nn::Rng rng(seed + 100);
  for (auto& e : a.entries) e.b.value = rng.normal_matrix<float>(e.b.value.rows(), e.b.value.cols(), 0.1);
  return a;
}

Coordinator make_coord(const model::Backbone& bb, std::size_t quorum, ValidationGate gate = {}) {
  return Coordinator(bb, std::move(gate), quorum);
}

Message hello(std::uint32_t node, std::uint32_t fp) {
  return Message{MessageType::hello, node, 0, hello_body(fp)};
}

Message submit(std::uint32_t node, const lora::LoraAdapter& a, const std::string& metrics = "{}") {
  return Message{MessageType::submit, node, a.round_id, submit_body(lora::serialize(a), metrics)};
}

// Sends one message and drains every reply the coordinator queued.
std::vector<Message> exchange(LoopbackChannel& ch, const Message& m, std::size_t replies = 1) {
  ch.send(m);
  std::vector<Message> out;
  for (std::size_t i = 0; i < replies; ++i) out.push_back(ch.receive());
  return out;
}

}  // namespace

TEST_SUITE("coordinator") {
  TEST_CASE("frames round-trip byte-exact") {
    const Message m = make_message(MessageType::submit, 7, 3, "payload body");
    const Bytes frame = encode_frame(m);
    std::array<std::uint8_t, 4> head{};
    std::copy_n(frame.begin(), 4, head.begin());
    CHECK(frame_length(head) == frame.size() - 4);
    const Message back = decode_payload(std::span(frame).subspan(4));
    CHECK(back.type == m.type);
    CHECK(back.node_id == 7);
    CHECK(back.round_id == 3);
    CHECK(back.body == m.body);
    CHECK(encode_frame(back) == frame);
  }

  TEST_CASE("every single-bit payload flip is rejected") {
    const Bytes payload = encode_payload(make_message(MessageType::bundle, 1, 2, "abc"));
    for (std::size_t bit = 0; bit < payload.size() * 8; ++bit) {
      Bytes bad = payload;
      bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      CHECK(code_of([&] { decode_payload(bad); }) == Errc::protocol);
    }
  }

  TEST_CASE("truncated, oversized and unknown-type payloads are protocol errors") {
    const Bytes payload = encode_payload(make_message(MessageType::ack, 1, 0));
    CHECK(code_of([&] { decode_payload(std::span(payload).first(payload.size() - 1)); }) == Errc::protocol);
    const std::array<std::uint8_t, 4> huge{0xFF, 0xFF, 0xFF, 0xFF};
    CHECK(code_of([&] { frame_length(huge); }) == Errc::protocol);
    Message m = make_message(MessageType::ack, 1, 0);
    m.type = static_cast<MessageType>(42);
    CHECK(code_of([&] { decode_payload(encode_payload(m)); }) == Errc::protocol);
  }

  TEST_CASE("HELLO is acknowledged with a catch-up bundle; a foreign backbone is rejected") {
    const auto bb = toy_backbone();
    Coordinator c = make_coord(bb, 1);
    LoopbackChannel ch(c);
    const auto r = exchange(ch, hello(1, c.fingerprint()), 2);
    CHECK(r[0].type == MessageType::ack);
    CHECK(r[1].type == MessageType::bundle);
    CHECK(lora::decode_bundle(r[1].body).empty());
    CHECK(c.registry().count(1) == 1);

    LoopbackChannel other(c);
    const auto rej = exchange(other, hello(2, c.fingerprint() ^ 1u));
    CHECK(rej[0].type == MessageType::reject);
    CHECK(body_text(rej[0]) == kIncompatibleBackbone);
    CHECK(c.registry().count(2) == 0);
  }

  TEST_CASE("a corrupted frame yields ERROR, closes the session and changes nothing") {
    const auto bb = toy_backbone();
    Coordinator c = make_coord(bb, 1);
    LoopbackChannel ch(c);
    Bytes frame = encode_frame(hello(1, c.fingerprint()));
    frame[10] ^= 0x04;
    ch.send_frame(frame);
    CHECK(ch.receive().type == MessageType::error);
    CHECK(c.registry().empty());
    CHECK(code_of([&] { ch.send(hello(1, c.fingerprint())); }) == Errc::connection);
  }

  TEST_CASE("SUBMIT validation reasons") {
    const auto bb = toy_backbone();
    Coordinator c = make_coord(bb, 3);
    LoopbackChannel ch(c);
    CHECK(exchange(ch, submit(1, make_adapter(bb, 1, {0, 1}, 1)))[0].type == MessageType::error);

    LoopbackChannel a(c), b(c), d(c);
    exchange(a, hello(1, c.fingerprint()), 2);
    exchange(b, hello(2, c.fingerprint()), 2);
    exchange(d, hello(3, c.fingerprint()), 2);

    Bytes bytes = lora::serialize(make_adapter(bb, 1, {0, 1}, 1));
    bytes[40] ^= 0x01;
    auto r = exchange(a, Message{MessageType::submit, 1, 1, submit_body(bytes, "{}")});
    CHECK(body_text(r[0]) == kBadChecksum);

    r = exchange(a, submit(1, make_adapter(bb, 1, {0, 1}, 1), "{not json"));
    CHECK(body_text(r[0]) == kBadMetrics);

    model::Backbone foreign = toy_backbone();
    foreign.parameters().front()->value(0, 0) += 1.0f;
    r = exchange(a, submit(1, make_adapter(foreign, 1, {0, 1}, 1)));
    CHECK(body_text(r[0]) == kIncompatibleBackbone);

    auto stamped = make_adapter(bb, 1, {0, 1}, 1);
    Message wrong_round = submit(1, stamped);
    wrong_round.round_id = 2;
    CHECK(body_text(exchange(a, wrong_round)[0]) == "round-mismatch");

    CHECK(exchange(a, submit(1, stamped))[0].type == MessageType::ack);
    CHECK(body_text(exchange(a, submit(1, stamped))[0]) == kDuplicateSubmission);
    // {1,2} partially overlaps node 1's {0,1}.
    CHECK(body_text(exchange(b, submit(2, make_adapter(bb, 1, {1, 2}, 2)))[0]) == kAmbiguousOverlap);
    CHECK_FALSE(c.published_round().has_value());
  }

  TEST_CASE("two disjoint nodes both land in the next bundle, byte-identical") {
    const auto bb = toy_backbone();
    Coordinator c = make_coord(bb, 2);
    LoopbackChannel ca(c), cb(c);
    EdgeClient a(1, bb, ca), b(2, bb, cb);
    a.register_node();
    b.register_node();
    const auto ad_a = make_adapter(bb, 1, {0, 1}, 11);
    const auto ad_b = make_adapter(bb, 1, {2, 3}, 12);
    CHECK(b.submit(ad_b, "{\"f1\":0.5}").accepted);
    CHECK_FALSE(c.published_round().has_value());
    CHECK(a.submit(ad_a, "{\"f1\":0.5}").accepted);
    CHECK(c.published_round() == 1u);

    const auto got = a.fetch_bundle(1, 0ms, 100ms);
    REQUIRE(got.size() == 2);
    CHECK(lora::serialize(got.adapters[0]) == lora::serialize(ad_a));
    CHECK(lora::serialize(got.adapters[1]) == lora::serialize(ad_b));
    CHECK_FALSE(c.delivered_to_all(1));
    b.apply(b.fetch_bundle(1, 0ms, 100ms));
    a.apply(got);
    CHECK(c.delivered_to_all(1));
    CHECK(lora::encode_bundle(*a.installed()) == lora::encode_bundle(*b.installed()));
    CHECK(body_text(Message{}) == "");
    CHECK(a.submit(make_adapter(bb, 1, {4, 5}, 13), "{}").reason == "round-closed");
  }

  TEST_CASE("submission order does not change the published bundle") {
    const auto bb = toy_backbone();
    Bytes first;
    for (int order = 0; order < 2; ++order) {
      Coordinator c = make_coord(bb, 2);
      LoopbackChannel ca(c), cb(c);
      EdgeClient a(1, bb, ca), b(2, bb, cb);
      a.register_node();
      b.register_node();
      const auto ad_a = make_adapter(bb, 4, {0, 1}, 21);
      const auto ad_b = make_adapter(bb, 4, {0, 1}, 22);
      if (order == 0) {
        a.submit(ad_a, "{}");
        b.submit(ad_b, "{}");
      } else {
        b.submit(ad_b, "{}");
        a.submit(ad_a, "{}");
      }
      const Bytes got = lora::encode_bundle(c.bundle());
      if (order == 0) first = got;
      CHECK(got == first);
      // Identical class sets are averaged into one adapter.
      CHECK(c.bundle().size() == 1);
    }
  }

  TEST_CASE("averaging: identity, element-wise mean, and the low-rank product caveat") {
    const auto bb = toy_backbone();
    const auto a = make_adapter(bb, 1, {0, 1}, 31);
    const lora::LoraAdapter same[] = {a, a, a};
    CHECK(lora::serialize(average_adapters(same, 1)) == lora::serialize(a));

    const auto b = make_adapter(bb, 1, {0, 1}, 32);
    const lora::LoraAdapter pair[] = {a, b};
    const auto avg = average_adapters(pair, 9);
    CHECK(avg.round_id == 9);
    const float expect = 0.5f * (a.entries[0].a.value(0, 0) + b.entries[0].a.value(0, 0));
    CHECK(avg.entries[0].a.value(0, 0) == doctest::Approx(expect));

    // Averaging factors is not averaging the updates they encode.
    const nn::Matrix d_avg = lora::dense_delta(avg.entries[0], 1.0f);
    const nn::Matrix da = lora::dense_delta(a.entries[0], 1.0f);
    const nn::Matrix db = lora::dense_delta(b.entries[0], 1.0f);
    double gap = 0.0;
    for (std::size_t i = 0; i < d_avg.rows(); ++i)
      for (std::size_t j = 0; j < d_avg.cols(); ++j)
        gap = std::max(gap, std::abs(double(d_avg(i, j)) - 0.5 * (da(i, j) + db(i, j))));
    CHECK(gap > 1e-6);

    const lora::LoraAdapter mixed[] = {a, make_adapter(bb, 1, {0, 2}, 33)};
    CHECK(code_of([&] { average_adapters(mixed, 1); }) == Errc::adapter);
  }

  TEST_CASE("holdout gate: harmless accepted, label-inverting rejected, epsilon 1 accepts all") {
    model::Backbone bb = toy_backbone();
    bb.set_frozen(true);
    continual::RoundState state;
    continual::RoundInput in;
    in.new_classes = {0, 1};
    in.train = toy_samples(24);
    in.test = toy_samples(8);
    continual::train_round(bb, in, toy_spec(Mode::lora), toy_lora(), state);
    const lora::LoraAdapter& trained = state.bundle.adapters.back();
    ValidationGate gate{toy_samples(10), 0.02};
    REQUIRE(continual::evaluate(std::vector<ClassId>(10, 0), std::vector<ClassId>(10, 0)).f1 == 1.0);

    lora::LoraAdapter same = trained;
    same.round_id = 1;
    CHECK(validate_candidate(bb, state.bundle, same, gate).accepted);

    lora::LoraAdapter inverted = trained;
    inverted.round_id = 1;
    const auto w = inverted.head.weight.value;
    const auto bias = inverted.head.bias.value;
    for (std::size_t j = 0; j < w.cols(); ++j) {
      inverted.head.weight.value(0, j) = w(1, j);
      inverted.head.weight.value(1, j) = w(0, j);
    }
    inverted.head.bias.value(0, 0) = bias(0, 1);
    inverted.head.bias.value(0, 1) = bias(0, 0);
    const GateDecision d = validate_candidate(bb, state.bundle, inverted, gate);
    CHECK(d.f1_before > 0.8);
    CHECK(d.f1_after < 0.5);
    CHECK_FALSE(d.accepted);
    gate.epsilon = 1.0;
    CHECK(validate_candidate(bb, state.bundle, inverted, gate).accepted);
    CHECK(validate_candidate(bb, lora::AdapterBundle{}, inverted, gate).accepted);
  }

  TEST_CASE("the gate drops a harmful contribution from the published bundle") {
    model::Backbone bb = toy_backbone();
    bb.set_frozen(true);
    continual::RoundState state;
    continual::RoundInput in;
    in.new_classes = {0, 1};
    in.train = toy_samples(24);
    in.test = toy_samples(8);
    continual::train_round(bb, in, toy_spec(Mode::lora), toy_lora(), state);
    lora::LoraAdapter good = state.bundle.adapters.back();
    lora::LoraAdapter bad = good;
    bad.round_id = 1;
    std::swap(bad.head.bias.value(0, 0), bad.head.bias.value(0, 1));
    for (std::size_t j = 0; j < bad.head.weight.value.cols(); ++j)
      std::swap(bad.head.weight.value(0, j), bad.head.weight.value(1, j));

    Coordinator c(bb, ValidationGate{toy_samples(10), 0.02}, 1);
    LoopbackChannel ch(c);
    EdgeClient e(1, bb, ch);
    e.register_node();
    CHECK(e.submit(good, "{}").accepted);
    CHECK(c.bundle().size() == 1);
    CHECK(e.submit(bad, "{}").accepted);
    CHECK(c.published_round() == 1u);
    CHECK(c.bundle().size() == 1);
    CHECK(c.history().back().gate_rejected == std::vector<std::uint32_t>{1});
  }

  TEST_CASE("late joiner catches up; pending fetch times out; empty apply is a no-op") {
    const auto bb = toy_backbone();
    Coordinator c = make_coord(bb, 1);
    LoopbackChannel ca(c);
    EdgeClient a(1, bb, ca);
    a.register_node();
    CHECK(a.installed()->empty());
    a.apply(lora::AdapterBundle{});
    CHECK(a.installed()->empty());
    CHECK(code_of([&] { a.fetch_bundle(0, 0ms, 20ms); }) == Errc::connection);

    const auto ad = make_adapter(bb, 0, {0, 1}, 41);
    CHECK(a.submit(ad, "{}").accepted);
    LoopbackChannel cl(c);
    EdgeClient late(9, bb, cl);
    late.register_node();
    REQUIRE(late.installed()->size() == 1);
    CHECK(lora::serialize(late.installed()->adapters[0]) == lora::serialize(ad));
    CHECK(c.registry().at(9).delivered_round == 0u);

    lora::AdapterBundle foreign;
    foreign.backbone_fingerprint = c.fingerprint() ^ 1u;
    foreign.adapters.push_back(ad);
    foreign.adapters.back().backbone_fingerprint = foreign.backbone_fingerprint;
    CHECK(code_of([&] { late.apply(foreign); }) == Errc::compatibility);
    CHECK(late.installed()->size() == 1);

    LoopbackChannel cx(c);
    model::Backbone other = toy_backbone();
    other.parameters().front()->value(0, 0) += 1.0f;
    EdgeClient stranger(5, other, cx);
    CHECK(code_of([&] { stranger.register_node(); }) == Errc::compatibility);
  }

  TEST_CASE("endpoints") {
    const Endpoint e = parse_endpoint("10.0.0.2:9000");
    CHECK(e.host == "10.0.0.2");
    CHECK(e.port == 9000);
    CHECK(code_of([] { parse_endpoint("nohost"); }) == Errc::config);
    CHECK(code_of([] { parse_endpoint("h:99999"); }) == Errc::config);
    CHECK(resolve_endpoint(std::string("1.2.3.4:5")).port == 5);
  }

  TEST_CASE("TCP transport matches loopback and reports bind and connection errors") {
    const auto bb = toy_backbone();
    const auto ad_a = make_adapter(bb, 1, {0, 1}, 51);
    const auto ad_b = make_adapter(bb, 1, {2, 3}, 52);

    Coordinator loop = make_coord(bb, 2);
    {
      LoopbackChannel ca(loop), cb(loop);
      EdgeClient a(1, bb, ca), b(2, bb, cb);
      a.register_node();
      b.register_node();
      a.submit(ad_a, "{}");
      b.submit(ad_b, "{}");
    }

    Coordinator c = make_coord(bb, 2);
    TcpServer server(c, Endpoint{"127.0.0.1", 0});
    REQUIRE(server.port() != 0);
    const Endpoint ep{"127.0.0.1", server.port()};
    Bytes got_a, got_b;
    std::thread tb([&] {
      TcpChannel ch(ep, 2000ms);
      EdgeClient b(2, bb, ch);
      b.register_node();
      b.submit(ad_b, "{}");
      b.apply(b.fetch_bundle(1, 5ms, 5000ms));
      got_b = lora::encode_bundle(*b.installed());
    });
    {
      TcpChannel ch(ep, 2000ms);
      EdgeClient a(1, bb, ch);
      a.register_node();
      a.submit(ad_a, "{}");
      a.apply(a.fetch_bundle(1, 5ms, 5000ms));
      got_a = lora::encode_bundle(*a.installed());
    }
    tb.join();
    CHECK(got_a == lora::encode_bundle(loop.bundle()));
    CHECK(got_b == got_a);
    CHECK(c.delivered_to_all(1));

    // A corrupted frame over the socket gets ERROR and the server lives on.
    {
      TcpChannel ch(ep, 2000ms);
      Bytes frame = encode_frame(hello(3, c.fingerprint()));
      frame.back() ^= 0x80;
      ch.send_frame(frame);
      CHECK(ch.receive().type == MessageType::error);
    }
    CHECK(code_of([&] { TcpServer dup(c, ep); }) == Errc::bind);
    server.stop();
    CHECK(code_of([&] { TcpChannel ch(ep, 100ms); }) == Errc::connection);
  }

  TEST_CASE("device schedules") {
    const auto two = default_device_schedules(data::table2_schedule(), 2);
    REQUIRE(two.size() == 2);
    CHECK(data::format_schedule(two[0]) == "Normal,DDoS_UDP,Password;XSS,Backdoor;SQL_injection,Fingerprinting");
    CHECK(data::format_schedule(two[1]) == "MITM,Port_Scanning,Uploading;DDoS_TCP,DDoS_ICMP;DDoS_HTTP,Ransomware");
    CHECK(default_device_schedules(data::table2_schedule(), 1)[0] == data::table2_schedule());
    CHECK(code_of([] { default_device_schedules(data::table2_schedule(), 3); }) == Errc::config);
    const auto parsed = parse_device_schedules(format_device_schedules(two));
    CHECK(parsed == two);
  }
}
