// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lecc::data {

/// Column layout of a synthetic flow table.
enum class FlowSchema {
  edge_iiotset,  ///< 61 feature columns after cleaning
  ton_iot,       ///< 44 feature columns after cleaning
};

struct SynthOptions {
  FlowSchema schema = FlowSchema::edge_iiotset;
  /// Class names exactly as written to the Attack_type column.
  std::vector<std::string> classes;
  std::size_t rows_per_class = 300;
  /// Sampling seed. Class profiles are fixed per schema, so two files drawn
  /// with different seeds share the same class-conditional distributions.
  std::uint64_t seed = 1;
};

/// Feature columns that survive null removal, in file order.
std::vector<std::string> schema_feature_columns(FlowSchema schema);
/// Extra sparse columns that contain empty cells and are removed on load.
std::vector<std::string> schema_sparse_columns(FlowSchema schema);

/// Class names a schema's generator knows profiles for. TON-IoT files use
/// the dataset's lower-case `type` names where one exists.
std::vector<std::string> schema_default_classes(FlowSchema schema);

/// Renders a synthetic labelled flow table (header + rows) as CSV text.
std::string generate_flow_csv(const SynthOptions& options);
void write_flow_csv(const std::filesystem::path& path, const SynthOptions& options);

}  // namespace lecc::data
