// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/coord/global.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lecc/error.hpp"
#include "lecc/nn/rng.hpp"
#include "lecc/parallel.hpp"

namespace lecc::coord {

using nlohmann::json;

namespace {

constexpr std::size_t kDomainSize = 7;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot write " + path.string());
  f << text;
}

void write_bytes(const std::filesystem::path& path, const Bytes& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Errc::io, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

/// Three classes first, then pairs; a trailing single joins the last round.
data::RoundSchedule deal_rounds(std::vector<std::string> classes) {
  std::vector<std::vector<std::string>> rounds;
  const std::size_t first = std::min<std::size_t>(3, classes.size());
  rounds.emplace_back(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(first));
  for (std::size_t i = first; i < classes.size(); i += 2) {
    if (i + 1 == classes.size()) {
      rounds.back().push_back(classes[i]);
    } else {
      rounds.push_back({classes[i], classes[i + 1]});
    }
  }
  return data::RoundSchedule(std::move(rounds));
}

std::vector<continual::Sample> samples_of(const data::DatasetBundle& data,
                                          const std::vector<data::FlowRecord>& records,
                                          const std::set<std::string>& classes) {
  std::vector<data::FlowRecord> kept;
  for (const auto& r : records)
    if (classes.count(r.attack_type)) kept.push_back(r);
  return continual::encode_samples(kept, data.codec, data.vocab, data.max_len);
}

Score score(std::span<const continual::Sample> samples, std::span<const ClassId> preds) {
  Score s;
  s.samples = samples.size();
  if (samples.empty()) return s;
  std::vector<ClassId> truth;
  for (const auto& x : samples) truth.push_back(x.label);
  s.accuracy = continual::evaluate(truth, preds).accuracy;
  s.f1 = continual::truth_macro_f1(truth, preds);
  return s;
}

json score_json(const Score& s) { return {{"accuracy", s.accuracy}, {"f1", s.f1}, {"samples", s.samples}}; }

}  // namespace

std::vector<data::RoundSchedule> default_device_schedules(const data::RoundSchedule& schedule,
                                                          std::size_t devices) {
  if (devices == 0) fail(Errc::config, "devices must be at least 1");
  if (devices == 1) return {schedule};
  const auto classes = schedule.all_classes();
  if (classes.size() < devices * kDomainSize)
    fail(Errc::config, "schedule has " + std::to_string(classes.size()) + " classes, " +
                           std::to_string(devices) + " devices need " + std::to_string(devices * kDomainSize));
  std::vector<data::RoundSchedule> out;
  for (std::size_t d = 0; d < devices; ++d) {
    const auto begin = classes.begin() + static_cast<std::ptrdiff_t>(d * kDomainSize);
    out.push_back(deal_rounds({begin, begin + static_cast<std::ptrdiff_t>(kDomainSize)}));
  }
  return out;
}

std::vector<data::RoundSchedule> parse_device_schedules(const std::string& text) {
  std::vector<data::RoundSchedule> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '|')) out.push_back(data::parse_schedule(part));
  if (out.empty()) fail(Errc::config, "empty device schedule list");
  return out;
}

std::string format_device_schedules(const std::vector<data::RoundSchedule>& schedules) {
  std::string out;
  for (std::size_t i = 0; i < schedules.size(); ++i) {
    if (i) out += '|';
    out += data::format_schedule(schedules[i]);
  }
  return out;
}

data::DatasetBundle device_dataset(const data::DatasetBundle& data, const data::RoundSchedule& schedule) {
  data::DatasetBundle out = data;
  out.schedule = schedule;
  const auto keep = [&](const data::Indices& idx) {
    data::Indices kept;
    for (std::size_t i : idx)
      if (schedule.round_of(data.records[i].attack_type) < schedule.size()) kept.push_back(i);
    return kept;
  };
  out.train = keep(data.train);
  out.test = keep(data.test);
  return out;
}

std::uint32_t exchange_round(const GlobalConfig& config) {
  std::size_t longest = 0;
  for (const auto& s : config.device_schedules) longest = std::max(longest, s.size());
  return static_cast<std::uint32_t>(longest);
}

GlobalSetup prepare_global(data::DatasetBundle data, GlobalConfig config,
                           std::optional<model::Backbone> pretrained) {
  if (config.experiment.train.mode != continual::Mode::lora)
    fail(Errc::config, "the global experiment exchanges adapters and needs mode=lora");
  if (config.device_schedules.empty()) fail(Errc::config, "no device schedules");
  std::set<std::string> seen;
  for (const auto& s : config.device_schedules)
    for (const auto& name : s.all_classes()) {
      if (!data.codec.contains(name)) fail(Errc::schedule, "class " + name + " is not in the dataset");
      if (!seen.insert(name).second) fail(Errc::schedule, "class " + name + " is assigned to two devices");
    }
  config.experiment.train.validate();

  GlobalSetup setup{std::move(data), std::move(config), model::Backbone{}};
  if (pretrained) {
    setup.backbone = std::move(*pretrained);
  } else {
    // First-round training data of every device, in device order.
    std::vector<continual::Sample> round0;
    for (const auto& s : setup.config.device_schedules) {
      const auto dev = device_dataset(setup.data, s);
      const auto rs = continual::round_samples(dev, dev.train_records(), dev.test_records(), dev.schedule);
      round0.insert(round0.end(), rs.train[0].begin(), rs.train[0].end());
    }
    const auto pool = continual::held_out_records(setup.data);
    setup.backbone = continual::prepare_backbone(setup.data, setup.config.experiment, pool, round0);
  }
  setup.backbone.set_frozen(true);
  return setup;
}

Coordinator make_coordinator(const GlobalSetup& setup) {
  std::set<std::string> classes;
  for (const auto& s : setup.config.device_schedules)
    for (const auto& name : s.all_classes()) classes.insert(name);
  auto pool = continual::held_out_records(setup.data);
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  nn::Rng rng(nn::derive_seed(setup.config.experiment.train.seed, 0x4741ull));
  rng.shuffle(order.begin(), order.end());
  std::map<std::string, std::size_t> taken;
  std::vector<std::size_t> chosen;
  for (std::size_t i : order) {
    const auto& name = pool[i].attack_type;
    if (!classes.count(name) || taken[name] >= setup.config.gate_holdout_per_class) continue;
    ++taken[name];
    chosen.push_back(i);
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<data::FlowRecord> records;
  for (std::size_t i : chosen) records.push_back(pool[i]);
  ValidationGate gate{
      continual::encode_samples(records, setup.data.codec, setup.data.vocab, setup.data.max_len),
      setup.config.gate_epsilon};
  return Coordinator(setup.backbone, std::move(gate), setup.config.device_schedules.size());
}

DeviceRun::DeviceRun(const GlobalSetup& setup, std::uint32_t node) : setup_(&setup), node_(node) {
  if (node >= setup.config.device_schedules.size())
    fail(Errc::config, "node " + std::to_string(node) + " is out of range for " +
                           std::to_string(setup.config.device_schedules.size()) + " devices");
  data_ = device_dataset(setup.data, setup.config.device_schedules[node]);
  std::set<std::string> own, cross;
  for (std::size_t d = 0; d < setup.config.device_schedules.size(); ++d)
    for (const auto& name : setup.config.device_schedules[d].all_classes()) (d == node ? own : cross).insert(name);
  const auto test = setup.data.test_records();
  own_test_ = samples_of(setup.data, test, own);
  cross_test_ = samples_of(setup.data, test, cross);
  report_.node = node;
  for (const auto& name : own) report_.domain_classes.push_back(setup.data.codec.encode(name));
  std::sort(report_.domain_classes.begin(), report_.domain_classes.end());
}

void DeviceRun::train() {
  local_ = continual::run_experiment(data_, setup_->config.experiment, setup_->backbone);
  report_.local = local_.report;
  const auto before = continual::predict_bundle(setup_->backbone, local_.state.bundle, own_test_);
  report_.own_before = score(own_test_, before);
  if (!cross_test_.empty()) {
    const auto cross = continual::predict_bundle(setup_->backbone, local_.state.bundle, cross_test_);
    report_.cross_before = score(cross_test_, cross);
  }
}

void DeviceRun::connect_and_submit(Channel& channel) {
  if (local_.state.bundle.empty()) fail(Errc::state, "train() must run before submission");
  client_ = std::make_unique<EdgeClient>(node_, setup_->backbone, channel);
  client_->register_node();
  lora::LoraAdapter adapter = local_.state.bundle.adapters.back();
  adapter.round_id = exchange_round(setup_->config);
  const auto& last = local_.report.rounds.back();
  const json metrics = {{"node", node_}, {"round", last.round}, {"accuracy", last.accuracy}, {"f1", last.f1}};
  const SubmitResult res = client_->submit(adapter, metrics.dump());
  report_.submitted = res.accepted;
  report_.reject_reason = res.reason;
}

void DeviceRun::fetch_and_evaluate(std::chrono::milliseconds poll, std::chrono::milliseconds timeout) {
  if (!client_) fail(Errc::state, "connect_and_submit() must run before the fetch");
  client_->apply(client_->fetch_bundle(exchange_round(setup_->config), poll, timeout));
  report_.bundle_size = client_->installed()->size();
  report_.own_after = score(own_test_, client_->predict(own_test_));
  if (!cross_test_.empty()) report_.cross_after = score(cross_test_, client_->predict(cross_test_));
}

GlobalReport run_global(const GlobalSetup& setup) {
  const std::size_t devices = setup.config.device_schedules.size();
  Coordinator coordinator = make_coordinator(setup);
  std::vector<std::unique_ptr<DeviceRun>> runs;
  std::vector<std::unique_ptr<LoopbackChannel>> channels;
  for (std::size_t d = 0; d < devices; ++d) {
    runs.push_back(std::make_unique<DeviceRun>(setup, static_cast<std::uint32_t>(d)));
    channels.push_back(std::make_unique<LoopbackChannel>(coordinator));
  }
  // Nodes run independently up to the exchange barrier; the coordinator
  // orders submissions by node id, so the outcome does not depend on timing.
  parallel_for(devices, [&](std::size_t d) {
    runs[d]->train();
    runs[d]->connect_and_submit(*channels[d]);
  });
  parallel_for(devices, [&](std::size_t d) {
    runs[d]->fetch_and_evaluate(std::chrono::milliseconds(0), std::chrono::milliseconds(1000));
  });

  GlobalReport report;
  report.exchange_round = exchange_round(setup.config);
  report.backbone_fingerprint = coordinator.fingerprint();
  for (const auto& s : setup.config.device_schedules) report.class_count += s.all_classes().size();
  for (const auto& r : runs) report.nodes.push_back(r->report());
  report.bundle = lora::encode_bundle(coordinator.bundle());
  return report;
}

std::string global_csv(const GlobalReport& report) {
  std::string out = "node,phase,domain,accuracy,f1,samples\n";
  const auto row = [&](std::uint32_t node, const char* phase, const char* domain, const Score& s) {
    out += std::to_string(node) + "," + phase + "," + domain + "," + continual::format_metric(s.accuracy) + "," +
           continual::format_metric(s.f1) + "," + std::to_string(s.samples) + "\n";
  };
  for (const auto& n : report.nodes) {
    row(n.node, "before", "own", n.own_before);
    row(n.node, "before", "cross", n.cross_before);
    row(n.node, "after", "own", n.own_after);
    row(n.node, "after", "cross", n.cross_after);
  }
  return out;
}

std::string node_exchange_json(const NodeReport& node) {
  const json j = {{"node", node.node},
                  {"domain_classes", node.domain_classes},
                  {"submitted", node.submitted},
                  {"reject_reason", node.reject_reason},
                  {"bundle_size", node.bundle_size},
                  {"own_before", score_json(node.own_before)},
                  {"cross_before", score_json(node.cross_before)},
                  {"own_after", score_json(node.own_after)},
                  {"cross_after", score_json(node.cross_after)}};
  return j.dump(2) + "\n";
}

void write_node(const std::filesystem::path& dir, const NodeReport& node) {
  std::filesystem::create_directories(dir);
  continual::write_experiment(dir, node.local);
  const continual::ExperimentReport reports[] = {node.local};
  write_text(dir / "trend.csv", continual::trend_csv(reports));
  write_text(dir / "exchange.json", node_exchange_json(node));
}

void write_global(const std::filesystem::path& dir, const GlobalReport& report) {
  std::filesystem::create_directories(dir);
  for (const auto& n : report.nodes) write_node(dir / ("node" + std::to_string(n.node)), n);
  write_text(dir / "global.csv", global_csv(report));
  write_bytes(dir / "bundle.bin", report.bundle);
}

}  // namespace lecc::coord
