// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lecc/continual/engine.hpp"
#include "lecc/data/bundle.hpp"

namespace lecc::continual {

struct ExperimentConfig {
  std::string backbone = "desk";
  lora::LoraConfig lora;
  TrainSpec train;
  PretrainSpec pretrain;
};

/// End-of-round evaluation on the cumulative test set.
struct RoundSummary {
  std::uint32_t round = 0;
  std::vector<ClassId> known;
  double accuracy = 0.0;
  double f1 = 0.0;
};

struct ExperimentReport {
  std::string model;
  Mode mode = Mode::lora;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;
  std::uint32_t backbone_fingerprint = 0;
  std::vector<EpochRecord> epochs;
  std::vector<RoundSummary> rounds;
  /// One entry per (earlier round, current round) pair.
  ForgettingReport forgetting;
};

struct ExperimentResult {
  ExperimentReport report;
  model::Backbone backbone;
  RoundState state;
};

/// Samples of each schedule round, encoded with the bundle's codec and vocab.
struct RoundSamples {
  std::vector<std::vector<Sample>> train;
  std::vector<std::vector<Sample>> test;
  std::vector<std::vector<ClassId>> classes;
};

RoundSamples round_samples(const data::DatasetBundle& data, std::span<const data::FlowRecord> train,
                           std::span<const data::FlowRecord> test, const data::RoundSchedule& schedule);

/// Replay set for round `round`: a `fraction` share (at least one sample)
/// of every earlier round's training samples per class.
std::vector<Sample> rehearsal_samples(const RoundSamples& rounds, std::size_t round, double fraction,
                                      std::uint64_t seed);

/// Records of the bundle that belong to neither split.
std::vector<data::FlowRecord> held_out_records(const data::DatasetBundle& data);

/// Fresh backbone for the bundle's vocabulary, pretrained per
/// config.pretrain. `pool` feeds the binary objective; `round0` the
/// round0 objective.
model::Backbone prepare_backbone(const data::DatasetBundle& data, const ExperimentConfig& config,
                                 std::span<const data::FlowRecord> pool, std::span<const Sample> round0);

/// Runs every schedule round in order on one model. In lora mode the
/// backbone is frozen for the whole run.
ExperimentResult run_experiment(const data::DatasetBundle& data, const ExperimentConfig& config,
                                model::Backbone backbone);

/// Forgetting entries for round `current`, from cumulative-test predictions
/// made right after each round. `offsets[r]` is where round r's test
/// samples start in the cumulative list.
std::vector<ForgettingEntry> forgetting_from_predictions(std::span<const Sample> cumulative_test,
                                                         std::span<const std::size_t> offsets,
                                                         std::span<const std::vector<ClassId>> predictions,
                                                         std::uint32_t current);

// ---------------------------------------------------------------- reports

/// round,epoch,loss,accuracy,precision,recall,f1 rows of one round.
std::string metrics_csv(const ExperimentReport& report, std::uint32_t round);
/// round,model,mode,f1 rows of every report.
std::string trend_csv(std::span<const ExperimentReport> reports);
/// The same values as trend_csv, as a JSON array.
std::string trend_json(std::span<const ExperimentReport> reports);
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

/// Writes metrics_round{r}.csv and report.json into `dir`.
void write_experiment(const std::filesystem::path& dir, const ExperimentReport& report);
ExperimentReport read_experiment(const std::filesystem::path& dir);

/// Fixed six-decimal rendering shared by every text report.
std::string format_metric(double v);

}  // namespace lecc::continual
