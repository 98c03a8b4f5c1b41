// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lecc/bytes.hpp"
#include "lecc/model/transformer.hpp"

namespace lecc::lora {

using model::ClassId;

enum class Target : std::uint8_t { query = 0, value = 1 };

struct LoraConfig {
  std::size_t rank = 8;
  float alpha = 16.0f;
  std::vector<Target> targets = {Target::query, Target::value};
  double init_std = 0.02;

  float scale() const noexcept { return alpha / static_cast<float>(rank); }
  /// r ≥ 1, r ≤ min(d_in, d_out), α > 0, non-empty duplicate-free targets.
  void validate(std::size_t width) const;
};

/// Low-rank pair for one (layer, projection). A is r×d_in, B is d_out×r.
struct LoraEntry {
  std::uint16_t layer = 0;
  Target target = Target::query;
  nn::Parameter a;
  nn::Parameter b;
};

/// One learning round's shippable artifact: low-rank updates plus the
/// classification head they were trained with.
struct LoraAdapter {
  std::uint32_t round_id = 0;
  LoraConfig config;
  std::vector<LoraEntry> entries;
  model::ClassificationHead head;
  std::uint32_t backbone_fingerprint = 0;

  const std::vector<ClassId>& classes() const noexcept { return head.classes; }
  /// Forward-time view. The attachment refers into this adapter.
  model::LoraAttachment attachment(std::size_t layers) const;
  /// A, B and head parameters.
  std::vector<nn::Parameter*> trainable_parameters();
};

/// A ~ Normal(0, σ²), B = 0, fresh head over `classes`.
LoraAdapter init_adapter(const LoraConfig& config, const model::Backbone& backbone,
                         std::uint32_t round_id, std::span<const ClassId> classes,
                         std::uint64_t seed);

/// x·W₀ᵀ + (α/r)·x·Aᵀ·Bᵀ without forming B·A.
nn::Matrix lora_delta(const nn::Matrix& x, const nn::Matrix& base_weight, const LoraEntry& entry,
                      float scale);

/// Dense ΔW = (α/r)·B·A for one entry.
nn::Matrix dense_delta(const LoraEntry& entry, float scale);

/// W' = W₀ + (α/r)·B·A on every target. The adapter must have been trained
/// against `backbone` (fingerprint match).
model::Backbone merge(const LoraAdapter& adapter, model::Backbone backbone);

/// LoRA A/B parameter count (head excluded).
std::size_t count_params(const LoraAdapter& adapter);
/// Closed form: layers × targets × (r·d + d·r).
std::size_t adapter_param_count(const LoraConfig& config, std::size_t layers, std::size_t width);
/// LoRA parameter count ÷ backbone parameter count.
double footprint_ratio(const LoraAdapter& adapter, const model::Backbone& backbone);

/// LADP adapter file, bit-exact little-endian layout with trailing CRC-32.
Bytes serialize(const LoraAdapter& adapter);
LoraAdapter deserialize(std::span<const std::uint8_t> bytes);
/// True if the trailing CRC-32 matches the preceding bytes.
bool has_valid_crc(std::span<const std::uint8_t> bytes);
/// Length of the LADP file starting at bytes[0], read from its header
/// fields. Format error if the header is truncated.
std::size_t encoded_length(std::span<const std::uint8_t> bytes);
/// Byte size of the LADP encoding for the given shape.
std::size_t serialized_size(std::size_t classes, std::size_t rank, std::size_t targets,
                            std::size_t width);

/// Adapters ordered by round id, all bound to one backbone fingerprint.
/// Adapters sharing a round id must cover disjoint class sets.
struct AdapterBundle {
  std::uint32_t backbone_fingerprint = 0;
  std::vector<LoraAdapter> adapters;

  bool empty() const noexcept { return adapters.empty(); }
  std::size_t size() const noexcept { return adapters.size(); }
  /// Inserts keeping round order; enforces the bundle invariants.
  void add(LoraAdapter adapter);
  /// Union of covered classes, ascending.
  std::vector<ClassId> known_classes() const;
};

/// Adapter count u16, then the adapter files back to back.
Bytes encode_bundle(const AdapterBundle& bundle);
AdapterBundle decode_bundle(std::span<const std::uint8_t> bytes);

/// Throws if the ordering, fingerprint or same-round disjointness rules fail.
void validate_bundle(const AdapterBundle& bundle);

}  // namespace lecc::lora
