// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lecc/data/labels.hpp"
#include "lecc/data/records.hpp"
#include "lecc/data/sampling.hpp"
#include "lecc/data/schedule.hpp"
#include "lecc/data/text.hpp"

namespace lecc::data {

struct SourceInfo {
  std::filesystem::path path;
  /// "none" or "ton": label alias table applied after loading.
  std::string aliases = "none";
  std::size_t record_count = 0;
  CleaningReport cleaning;
};

/// Canonical prepared dataset: records are referenced by index into the
/// concatenation of all sources, so the bundle stays small and exact.
struct DatasetBundle {
  std::uint64_t seed = 0;
  std::string preset;
  std::vector<SourceInfo> sources;
  LabelCodec codec;
  TokenVocab vocab;
  std::size_t max_len = kDefaultMaxLen;
  Indices train;
  Indices test;
  RoundSchedule schedule;
  /// Concatenated cleaned records of every source (not serialized).
  std::vector<FlowRecord> records;

  std::vector<FlowRecord> train_records() const;
  std::vector<FlowRecord> test_records() const;
  /// Records of one source, by position in `sources`.
  std::pair<std::size_t, std::size_t> source_range(std::size_t source) const;
};

struct PrepareOptions {
  std::vector<std::filesystem::path> csv_paths;
  /// Alias table per CSV ("none" or "ton"); missing entries mean "none".
  std::vector<std::string> aliases;
  std::string preset = "table3";  ///< few-shot preset, or "fraction"
  double train_fraction = 0.6;
  std::string schedule = "table2";
  std::size_t max_len = kDefaultMaxLen;
  std::uint64_t seed = 1;
};

/// Loads, cleans, samples, splits and builds codec + vocabulary. Few-shot
/// sampling and splitting are applied per source.
DatasetBundle prepare_dataset(const PrepareOptions& options);

std::string bundle_to_json(const DatasetBundle& bundle);
/// Parses the JSON and reloads the referenced CSV sources.
DatasetBundle bundle_from_json(const std::string& json_text,
                               const std::filesystem::path& base_dir = {});
void save_bundle(const std::filesystem::path& path, const DatasetBundle& bundle);
DatasetBundle load_bundle(const std::filesystem::path& path);

std::string cleaning_report_json(const DatasetBundle& bundle);

}  // namespace lecc::data
