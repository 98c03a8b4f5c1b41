// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lecc/data/records.hpp"

namespace lecc::data {

using Indices = std::vector<std::size_t>;

struct ClassBudget {
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t total() const noexcept { return train + test; }
};

/// Per-class few-shot budget keyed by normalized class name.
using FewShotPreset = std::map<std::string, ClassBudget>;

/// The combined train/test sample distribution (250 per class).
const FewShotPreset& table3_preset();
/// Looks up a preset by name ("table3"); unknown names are a config error.
const FewShotPreset& few_shot_preset(const std::string& name);

/// Uniform per-class sample without replacement. Classes missing from
/// `counts` (or with count 0) are dropped. Returned indices are ascending.
Indices few_shot_sample(std::span<const FlowRecord> records,
                        const std::map<std::string, std::size_t>& counts, std::uint64_t seed);

struct IndexSplit {
  Indices train;
  Indices test;
};

struct DatasetSplit {
  std::vector<FlowRecord> train;
  std::vector<FlowRecord> test;
  std::uint64_t seed = 0;
};

/// Per-class shuffled split; each class contributes round(n·fraction) records
/// to train. `subset` restricts the split to those indices (empty = all).
IndexSplit split_indices(std::span<const FlowRecord> records, double train_fraction,
                         std::uint64_t seed, const Indices& subset = {});

/// Per-class shuffled split with exact train counts per class.
IndexSplit split_indices_by_count(std::span<const FlowRecord> records,
                                  const std::map<std::string, std::size_t>& train_counts,
                                  std::uint64_t seed, const Indices& subset = {});

DatasetSplit split(std::span<const FlowRecord> records, double train_fraction, std::uint64_t seed);

DatasetSplit materialize(std::span<const FlowRecord> records, const IndexSplit& split,
                         std::uint64_t seed);

struct Fold {
  Indices train;
  Indices validate;
};

/// Stratified k-fold: each class's shuffled records are dealt round-robin
/// across folds, continuing the dealing position from class to class.
std::vector<Fold> kfold(std::span<const FlowRecord> records, std::size_t k, std::uint64_t seed);

}  // namespace lecc::data
