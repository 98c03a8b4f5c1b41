// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace lecc::data {

struct Feature {
  std::string name;
  std::string value;

  bool operator==(const Feature&) const = default;
};

/// One network-flow sample. Feature order follows the source file's columns.
struct FlowRecord {
  std::vector<Feature> features;
  std::string attack_type;
  bool attack_label = false;

  bool operator==(const FlowRecord&) const = default;
};

struct TargetColumns {
  std::string attack_type = "Attack_type";
  std::string attack_label = "Attack_label";
};

struct CleaningReport {
  std::vector<std::string> dropped_columns;
  std::vector<std::string> kept_columns;
  /// Set when every feature column was dropped.
  bool no_features_left = false;
};

/// True for cells treated as missing: empty, "null", "NULL", "NaN", "nan", "None".
bool is_null_value(const std::string& cell);

/// Removes every feature column that holds at least one null cell in any
/// record. Column identity is the feature name.
std::vector<FlowRecord> drop_null_features(std::vector<FlowRecord> records,
                                           CleaningReport* report = nullptr);

/// Reads a header-row CSV and applies drop_null_features.
std::vector<FlowRecord> load_csv(const std::filesystem::path& path,
                                 const TargetColumns& targets = {},
                                 CleaningReport* report = nullptr);

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerant.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace lecc::data
