// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lecc/data/labels.hpp"

namespace lecc::continual {

using data::ClassId;

/// Square count matrix indexed by position in `labels`: counts[truth][pred].
struct ConfusionMatrix {
  std::vector<ClassId> labels;
  std::vector<std::vector<std::uint64_t>> counts;

  std::uint64_t total() const noexcept;
  std::uint64_t trace() const noexcept;
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Builds the matrix over `labels` when given (every id must be listed), or
/// over the sorted union of truth and predictions otherwise.
ConfusionMatrix confusion_matrix(std::span<const ClassId> truth, std::span<const ClassId> predicted,
                                 std::optional<std::span<const ClassId>> labels = std::nullopt);

struct ClassScores {
  ClassId label = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

/// Accuracy and macro-averaged precision, recall and F1. Any 0/0 is 0.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm);
Metrics compute_metrics(const ConfusionMatrix& cm);

/// Data error for an empty or length-mismatched prediction set.
Metrics evaluate(std::span<const ClassId> truth, std::span<const ClassId> predicted,
                 ConfusionMatrix* cm_out = nullptr);

/// Macro-F1 averaged over the classes that occur in `truth` only.
/// Predictions of any other class still count as misses, but such classes
/// do not enter the average. Used for per-subset scores.
double truth_macro_f1(std::span<const ClassId> truth, std::span<const ClassId> predicted);

}  // namespace lecc::continual
