// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/data/schedule.hpp"

#include <set>
#include <sstream>

#include "lecc/data/labels.hpp"
#include "lecc/error.hpp"

namespace lecc::data {

RoundSchedule::RoundSchedule(std::vector<std::vector<std::string>> rounds) {
  if (rounds.empty()) fail(Errc::schedule, "schedule has no rounds");
  std::set<std::string> seen;
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    if (rounds[r].empty()) fail(Errc::schedule, "round " + std::to_string(r) + " introduces no classes");
    if (r > 0 && rounds[r].size() < 2) {
      fail(Errc::schedule, "round " + std::to_string(r) + " must introduce at least two classes");
    }
    std::vector<std::string> names;
    for (const auto& n : rounds[r]) {
      std::string norm = normalize_label(n);
      if (!seen.insert(norm).second) fail(Errc::schedule, "class " + norm + " scheduled twice");
      names.push_back(std::move(norm));
    }
    rounds_.push_back(std::move(names));
  }
}

std::vector<std::string> RoundSchedule::known_through(std::size_t r) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i <= r && i < rounds_.size(); ++i)
    out.insert(out.end(), rounds_[i].begin(), rounds_[i].end());
  return out;
}

std::vector<std::string> RoundSchedule::all_classes() const {
  return rounds_.empty() ? std::vector<std::string>{} : known_through(rounds_.size() - 1);
}

std::size_t RoundSchedule::round_of(const std::string& name) const {
  const std::string norm = normalize_label(name);
  for (std::size_t r = 0; r < rounds_.size(); ++r)
    for (const auto& n : rounds_[r])
      if (n == norm) return r;
  return rounds_.size();
}

const RoundSchedule& table2_schedule() {
  static const RoundSchedule schedule({
      {"Normal", "DDoS_UDP", "Password"},
      {"XSS", "Backdoor"},
      {"SQL_injection", "Fingerprinting"},
      {"MITM", "Port_Scanning"},
      {"Uploading", "DDoS_TCP"},
      {"DDoS_ICMP", "DDoS_HTTP"},
      {"Ransomware", "Vulnerability_scanner"},
  });
  return schedule;
}

RoundSchedule parse_schedule(const std::string& spec) {
  if (spec == "table2") return table2_schedule();
  std::vector<std::vector<std::string>> rounds;
  std::stringstream rs(spec);
  std::string round;
  while (std::getline(rs, round, ';')) {
    std::vector<std::string> names;
    std::stringstream cs(round);
    std::string name;
    while (std::getline(cs, name, ',')) {
      name = normalize_label(name);
      if (!name.empty()) names.push_back(name);
    }
    rounds.push_back(std::move(names));
  }
  return RoundSchedule(std::move(rounds));
}

std::string format_schedule(const RoundSchedule& schedule) {
  std::string out;
  for (std::size_t r = 0; r < schedule.size(); ++r) {
    if (r) out.push_back(';');
    for (std::size_t i = 0; i < schedule.round(r).size(); ++i) {
      if (i) out.push_back(',');
      out += schedule.round(r)[i];
    }
  }
  return out;
}

std::vector<RoundData> partition_rounds(const std::vector<FlowRecord>& train,
                                        const std::vector<FlowRecord>& test,
                                        const RoundSchedule& schedule) {
  std::vector<RoundData> out(schedule.size());
  auto place = [&](const FlowRecord& rec, bool is_train) {
    const std::size_t r = schedule.round_of(rec.attack_type);
    if (r == schedule.size()) fail(Errc::schedule, "class " + rec.attack_type + " is not scheduled");
    (is_train ? out[r].train : out[r].test).push_back(rec);
  };
  for (const auto& rec : train) place(rec, true);
  for (const auto& rec : test) place(rec, false);
  return out;
}

}  // namespace lecc::data
