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

using ClassId = std::uint32_t;

/// Trims surrounding whitespace and turns inner spaces into underscores, so
/// "SQL injection" and "SQL_injection" name the same class.
std::string normalize_label(std::string_view name);

/// Dense class-name ↔ id map. Ids follow lexicographic order of the
/// normalized names; one codec instance serves every dataset.
class LabelCodec {
 public:
  LabelCodec() = default;
  explicit LabelCodec(std::span<const std::string> class_names);

  ClassId encode(std::string_view name) const;
  const std::string& decode(ClassId id) const;
  bool contains(std::string_view name) const;
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  bool operator==(const LabelCodec&) const = default;

 private:
  std::vector<std::string> names_;
  std::map<std::string, ClassId, std::less<>> ids_;
};

LabelCodec build_label_codec(std::span<const std::string> class_names);

/// Lower-case TON-IoT `type` names mapped onto the Edge-IIoTset vocabulary.
const std::map<std::string, std::string>& ton_label_aliases();

/// Rewrites attack_type through `aliases` (exact match) and normalizes it.
void apply_label_aliases(std::vector<FlowRecord>& records,
                         const std::map<std::string, std::string>& aliases);

}  // namespace lecc::data
