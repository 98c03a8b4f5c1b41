// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/data/labels.hpp"

#include <algorithm>

#include "lecc/error.hpp"

namespace lecc::data {

std::string normalize_label(std::string_view name) {
  const auto first = name.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = name.find_last_not_of(" \t\r\n");
  std::string out(name.substr(first, last - first + 1));
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

LabelCodec::LabelCodec(std::span<const std::string> class_names) {
  if (class_names.empty()) fail(Errc::codec, "label codec needs at least one class");
  for (const auto& n : class_names) names_.push_back(normalize_label(n));
  std::sort(names_.begin(), names_.end());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) fail(Errc::codec, "empty class name");
    if (i > 0 && names_[i] == names_[i - 1]) fail(Errc::codec, "duplicate class name " + names_[i]);
    ids_.emplace(names_[i], static_cast<ClassId>(i));
  }
}

ClassId LabelCodec::encode(std::string_view name) const {
  const auto it = ids_.find(normalize_label(name));
  if (it == ids_.end()) fail(Errc::codec, "unknown class " + std::string(name));
  return it->second;
}

const std::string& LabelCodec::decode(ClassId id) const {
  if (id >= names_.size()) fail(Errc::codec, "class id " + std::to_string(id) + " out of range");
  return names_[id];
}

bool LabelCodec::contains(std::string_view name) const {
  return ids_.find(normalize_label(name)) != ids_.end();
}

LabelCodec build_label_codec(std::span<const std::string> class_names) {
  return LabelCodec(class_names);
}

const std::map<std::string, std::string>& ton_label_aliases() {
  static const std::map<std::string, std::string> aliases = {
      {"normal", "Normal"},       {"backdoor", "Backdoor"},
      {"password", "Password"},   {"ransomware", "Ransomware"},
      {"xss", "XSS"},             {"mitm", "MITM"},
      {"scanning", "Port_Scanning"}, {"injection", "SQL_injection"},
  };
  return aliases;
}

void apply_label_aliases(std::vector<FlowRecord>& records,
                         const std::map<std::string, std::string>& aliases) {
  for (auto& r : records) {
    const auto it = aliases.find(r.attack_type);
    r.attack_type = normalize_label(it == aliases.end() ? r.attack_type : it->second);
  }
}

}  // namespace lecc::data
