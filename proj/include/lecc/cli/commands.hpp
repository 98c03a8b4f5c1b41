// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "lecc/cli/config.hpp"
#include "lecc/coord/transport.hpp"
#include "lecc/data/synth.hpp"

namespace lecc::cli {

/// Writes dataset.json and cleaning.json into `out`.
void prepare_data(const data::PrepareOptions& options, const std::filesystem::path& out);

/// Writes a synthetic flow CSV to `out`.
void synth_data(const data::SynthOptions& options, const std::filesystem::path& out);

/// The configured dataset: loaded when `dataset` is set, prepared otherwise.
data::DatasetBundle load_dataset(const RunConfig& config);

/// Backbone from `backbone_file`, or pretrained per the config.
model::Backbone load_or_pretrain(const RunConfig& config, const data::DatasetBundle& data);

/// Every configured mode on one shared backbone. Writes `<mode>/` report
/// directories, trend.csv, trend.json, backbone.bin, bundle.bin (LoRA mode)
/// and config.txt under config.out.
void run_local(const RunConfig& config);

/// Global setup for `devices` nodes (config.devices when unset).
coord::GlobalSetup global_setup(const RunConfig& config, std::optional<std::size_t> devices = std::nullopt);

/// In-process global experiment. Writes node{k}/ directories, global.csv,
/// bundle.bin, backbone.bin and config.txt under config.out.
coord::GlobalReport run_global(const RunConfig& config, std::optional<std::size_t> devices = std::nullopt);

struct ServeOptions {
  coord::Endpoint endpoint;
  /// Exit once the exchange round has reached every expected node.
  bool exit_after_exchange = false;
  /// Called with the bound port once listening.
  std::function<void(std::uint16_t)> on_listen;
};

/// Serves the coordinator until `stop` is set or, with
/// exit_after_exchange, until every device has the exchange bundle.
/// Persists bundle.bin under config.out on the way out.
void serve(const RunConfig& config, const ServeOptions& options, const std::atomic<bool>& stop);

/// One edge device over TCP. Writes node{k}/ under config.out.
coord::NodeReport edge(const RunConfig& config, std::uint32_t node, const coord::Endpoint& endpoint,
                       std::chrono::milliseconds timeout);

/// Trend data of every report.json under `in`, as "csv" or "json".
std::string report(const std::filesystem::path& in, const std::string& format);

}  // namespace lecc::cli
