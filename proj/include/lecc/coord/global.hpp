// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lecc/continual/experiment.hpp"
#include "lecc/coord/coordinator.hpp"
#include "lecc/coord/edge.hpp"

namespace lecc::coord {

/// Cross-device experiment: every device learns its own class domain over
/// local rounds, then all devices exchange adapters through one coordinator.
struct GlobalConfig {
  continual::ExperimentConfig experiment;
  /// One local schedule per device; class sets must be disjoint.
  std::vector<data::RoundSchedule> device_schedules;
  std::size_t gate_holdout_per_class = 20;
  double gate_epsilon = 0.02;
};

/// Two devices: the first fourteen scheduled classes dealt into two
/// seven-class domains of three local rounds each (3, 2, 2 new classes).
/// One device: the dataset's own schedule.
std::vector<data::RoundSchedule> default_device_schedules(const data::RoundSchedule& schedule,
                                                          std::size_t devices);
/// "A,B,C;D,E|F,G,H;I,J": devices separated by '|'.
std::vector<data::RoundSchedule> parse_device_schedules(const std::string& text);
std::string format_device_schedules(const std::vector<data::RoundSchedule>& schedules);

/// The dataset restricted to one device's classes, with its schedule.
data::DatasetBundle device_dataset(const data::DatasetBundle& data, const data::RoundSchedule& schedule);

/// Global round at which devices exchange: one past the longest local run.
std::uint32_t exchange_round(const GlobalConfig& config);

/// Accuracy and macro-F1 of one evaluation; F1 averages over the classes
/// present in the evaluated samples.
struct Score {
  double accuracy = 0.0;
  double f1 = 0.0;
  std::size_t samples = 0;
};

struct NodeReport {
  std::uint32_t node = 0;
  continual::ExperimentReport local;
  std::vector<data::ClassId> domain_classes;
  Score own_before, cross_before, own_after, cross_after;
  bool submitted = false;
  std::string reject_reason;
  std::size_t bundle_size = 0;
};

struct GlobalReport {
  std::uint32_t exchange_round = 0;
  std::uint32_t backbone_fingerprint = 0;
  std::size_t class_count = 0;
  std::vector<NodeReport> nodes;
  Bytes bundle;
};

/// Shared starting point of every participant, rebuilt identically by each
/// process from the same dataset and configuration.
struct GlobalSetup {
  data::DatasetBundle data;
  GlobalConfig config;
  model::Backbone backbone;
};

/// Pretrains per the experiment config unless `pretrained` is given.
GlobalSetup prepare_global(data::DatasetBundle data, GlobalConfig config,
                           std::optional<model::Backbone> pretrained = std::nullopt);
/// Coordinator with the holdout gate drawn from records outside every split.
Coordinator make_coordinator(const GlobalSetup& setup);

/// One device's full life cycle over `channel`: local rounds, HELLO,
/// SUBMIT of its newest adapter restamped with the exchange round, BUNDLE
/// fetch and evaluation.
class DeviceRun {
 public:
  DeviceRun(const GlobalSetup& setup, std::uint32_t node);
  void train();
  void connect_and_submit(Channel& channel);
  void fetch_and_evaluate(std::chrono::milliseconds poll, std::chrono::milliseconds timeout);
  const NodeReport& report() const noexcept { return report_; }

 private:
  const GlobalSetup* setup_;
  std::uint32_t node_;
  data::DatasetBundle data_;
  continual::ExperimentResult local_;
  std::vector<continual::Sample> own_test_;
  std::vector<continual::Sample> cross_test_;
  std::unique_ptr<EdgeClient> client_;
  NodeReport report_;
};

/// All devices and the coordinator in one process over loopback channels.
GlobalReport run_global(const GlobalSetup& setup);

// ---------------------------------------------------------------- reports

/// node,phase,domain,accuracy,f1,samples rows.
std::string global_csv(const GlobalReport& report);
std::string node_exchange_json(const NodeReport& node);
/// node{k}/ with the local round files and exchange.json.
void write_node(const std::filesystem::path& dir, const NodeReport& node);
void write_global(const std::filesystem::path& dir, const GlobalReport& report);

}  // namespace lecc::coord
