// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/data/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "lecc/data/labels.hpp"
#include "lecc/error.hpp"
#include "lecc/nn/rng.hpp"

namespace lecc::data {

namespace {

std::map<std::string, Indices> by_class(std::span<const FlowRecord> records, const Indices& subset) {
  std::map<std::string, Indices> groups;
  if (subset.empty()) {
    for (std::size_t i = 0; i < records.size(); ++i)
      groups[normalize_label(records[i].attack_type)].push_back(i);
  } else {
    for (std::size_t i : subset) {
      if (i >= records.size()) fail(Errc::input, "record index " + std::to_string(i) + " out of range");
      groups[normalize_label(records[i].attack_type)].push_back(i);
    }
  }
  return groups;
}

template <typename TrainCount>
IndexSplit split_groups(std::span<const FlowRecord> records, const Indices& subset,
                        std::uint64_t seed, TrainCount&& train_count) {
  IndexSplit out;
  nn::Rng rng(seed);
  for (auto& [name, idx] : by_class(records, subset)) {
    rng.shuffle(idx.begin(), idx.end());
    const std::size_t n_train = train_count(name, idx.size());
    out.train.insert(out.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.insert(out.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

}  // namespace

const FewShotPreset& table3_preset() {
  static const FewShotPreset preset = {
      {"Normal", {145, 105}},
      {"DDoS_UDP", {155, 95}},
      {"Password", {146, 104}},
      {"XSS", {142, 108}},
      {"Backdoor", {152, 98}},
      {"SQL_injection", {136, 114}},
      {"Fingerprinting", {150, 100}},
      {"MITM", {158, 92}},
      {"Port_Scanning", {156, 94}},
      {"Uploading", {155, 95}},
      {"DDoS_TCP", {142, 108}},
      {"DDoS_ICMP", {155, 95}},
      {"DDoS_HTTP", {153, 97}},
      {"Ransomware", {156, 94}},
      {"Vulnerability_scanner", {149, 101}},
  };
  return preset;
}

const FewShotPreset& few_shot_preset(const std::string& name) {
  if (name == "table3") return table3_preset();
  fail(Errc::config, "unknown few-shot preset " + name);
}

Indices few_shot_sample(std::span<const FlowRecord> records,
                        const std::map<std::string, std::size_t>& counts, std::uint64_t seed) {
  auto groups = by_class(records, {});
  Indices out;
  nn::Rng rng(seed);
  for (const auto& [raw_name, want] : counts) {
    if (want == 0) continue;
    const std::string name = normalize_label(raw_name);
    auto it = groups.find(name);
    const std::size_t have = it == groups.end() ? 0 : it->second.size();
    if (want > have) {
      fail(Errc::count, "class " + name + ": requested " + std::to_string(want) + " samples, only " +
                            std::to_string(have) + " available");
    }
    Indices& idx = it->second;
    for (std::size_t i = 0; i < want; ++i) {
      const std::size_t j = i + rng.index(idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want));
  }
  std::sort(out.begin(), out.end());
  return out;
}

IndexSplit split_indices(std::span<const FlowRecord> records, double train_fraction,
                         std::uint64_t seed, const Indices& subset) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(Errc::config, "train fraction must lie strictly between 0 and 1");
  }
  return split_groups(records, subset, seed, [&](const std::string&, std::size_t n) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  });
}

IndexSplit split_indices_by_count(std::span<const FlowRecord> records,
                                  const std::map<std::string, std::size_t>& train_counts,
                                  std::uint64_t seed, const Indices& subset) {
  return split_groups(records, subset, seed, [&](const std::string& name, std::size_t n) {
    const auto it = train_counts.find(name);
    if (it == train_counts.end()) fail(Errc::count, "no train count for class " + name);
    if (it->second > n) {
      fail(Errc::count, "class " + name + ": train count " + std::to_string(it->second) +
                            " exceeds " + std::to_string(n) + " sampled records");
    }
    return it->second;
  });
}

DatasetSplit materialize(std::span<const FlowRecord> records, const IndexSplit& split,
                         std::uint64_t seed) {
  DatasetSplit out;
  out.seed = seed;
  for (std::size_t i : split.train) out.train.push_back(records[i]);
  for (std::size_t i : split.test) out.test.push_back(records[i]);
  return out;
}

DatasetSplit split(std::span<const FlowRecord> records, double train_fraction, std::uint64_t seed) {
  return materialize(records, split_indices(records, train_fraction, seed), seed);
}

std::vector<Fold> kfold(std::span<const FlowRecord> records, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(Errc::config, "k-fold needs k >= 2");
  if (k > records.size()) {
    fail(Errc::config, "k-fold: k=" + std::to_string(k) + " exceeds " +
                           std::to_string(records.size()) + " records");
  }
  std::vector<Indices> buckets(k);
  nn::Rng rng(seed);
  std::size_t pos = 0;
  for (auto& [name, idx] : by_class(records, {})) {
    rng.shuffle(idx.begin(), idx.end());
    for (std::size_t i : idx) buckets[pos++ % k].push_back(i);
  }
  std::vector<Fold> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    folds[f].validate = buckets[f];
    std::sort(folds[f].validate.begin(), folds[f].validate.end());
    for (std::size_t g = 0; g < k; ++g)
      if (g != f) folds[f].train.insert(folds[f].train.end(), buckets[g].begin(), buckets[g].end());
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

}  // namespace lecc::data
