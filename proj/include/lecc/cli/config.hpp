// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lecc/continual/experiment.hpp"
#include "lecc/coord/global.hpp"
#include "lecc/data/bundle.hpp"

namespace lecc::cli {

/// Everything a command needs, read from a flat `key = value` file.
struct RunConfig {
  /// Either a prepared dataset (`dataset`) or raw CSVs (`csv`, `aliases`,
  /// `preset`, `schedule`, `train_fraction`, `max_len`).
  std::optional<std::filesystem::path> dataset;
  data::PrepareOptions prepare;
  /// Optional MBKB checkpoint used instead of pretraining.
  std::optional<std::filesystem::path> backbone_file;
  std::vector<continual::Mode> modes = {continual::Mode::full, continual::Mode::lora};
  continual::ExperimentConfig experiment;
  double lr_full = 1e-3;
  double lr_lora = 1e-2;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  std::size_t devices = 2;
  /// Explicit per-device schedules ("...|..."); derived from the dataset
  /// schedule when absent.
  std::optional<std::string> device_schedules;
  double gate_epsilon = 0.02;
  std::size_t gate_holdout = 20;

  /// Experiment config for one mode, with that mode's learning rate.
  continual::ExperimentConfig for_mode(continual::Mode mode) const;
};

/// Every recognised key.
const std::vector<std::string>& config_keys();

/// Parses the text of a config file. Relative paths resolve against
/// `base_dir`. Config error for unknown keys, malformed lines, bad values
/// or a missing seed; I/O error for referenced files that do not exist.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` rendering of the effective configuration.
std::string render_config(const RunConfig& config);

}  // namespace lecc::cli
