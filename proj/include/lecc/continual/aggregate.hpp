// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lecc/lora/adapter.hpp"

namespace lecc::continual {

using data::ClassId;

/// (x - mean) / std over one logit vector, population statistics. A
/// vector with zero variance maps to all zeros.
std::vector<double> zscore(std::span<const float> logits);

/// One adapter's raw output for a sample, in bundle order.
struct AdapterLogits {
  std::uint32_t round_id = 0;
  std::vector<ClassId> classes;
  std::vector<float> logits;
};

struct Prediction {
  ClassId label = 0;
  /// Unified normalized scores, ascending by class id.
  std::vector<std::pair<ClassId, double>> scores;
};

/// Writes each adapter's normalized scores into one table in the given
/// order, later entries overwriting earlier ones for shared classes, then
/// takes the argmax (ties go to the lowest class id). State error if empty.
Prediction aggregate_logits(std::span<const AdapterLogits> outputs);

/// Logits of every adapter in `bundle` for one token sequence.
std::vector<AdapterLogits> bundle_logits(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                                         std::span<const data::TokenId> ids);

/// Runs every adapter of the bundle and aggregates. The bundle must be
/// non-empty and bound to `backbone`'s fingerprint.
Prediction multi_round_predict(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                               std::span<const data::TokenId> ids);

/// Fingerprint and non-emptiness checks shared by the predict paths.
void check_bundle_for(const model::Backbone& backbone, const lora::AdapterBundle& bundle);

}  // namespace lecc::continual
