// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "lecc/data/records.hpp"

namespace lecc::data {

/// Round index → classes first introduced in that round.
class RoundSchedule {
 public:
  RoundSchedule() = default;
  /// Validates that class names are disjoint across rounds and that every
  /// round after the first introduces at least two classes.
  explicit RoundSchedule(std::vector<std::vector<std::string>> rounds);

  std::size_t size() const noexcept { return rounds_.size(); }
  const std::vector<std::string>& round(std::size_t r) const { return rounds_.at(r); }
  const std::vector<std::vector<std::string>>& rounds() const noexcept { return rounds_; }
  /// All classes introduced in rounds 0..r.
  std::vector<std::string> known_through(std::size_t r) const;
  std::vector<std::string> all_classes() const;
  /// Round that introduces `name`, or size() if unscheduled.
  std::size_t round_of(const std::string& name) const;

  bool operator==(const RoundSchedule&) const = default;

 private:
  std::vector<std::vector<std::string>> rounds_;
};

/// Seven-round schedule: three classes in round 0, then pairs.
const RoundSchedule& table2_schedule();

/// "table2" or an inline schedule "A,B,C;D,E;F,G".
RoundSchedule parse_schedule(const std::string& spec);
std::string format_schedule(const RoundSchedule& schedule);

struct RoundData {
  std::vector<FlowRecord> train;
  std::vector<FlowRecord> test;
};

/// Splits train and test records by the round that introduces their class.
std::vector<RoundData> partition_rounds(const std::vector<FlowRecord>& train,
                                        const std::vector<FlowRecord>& test,
                                        const RoundSchedule& schedule);

}  // namespace lecc::data
