// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "lecc/continual/aggregate.hpp"
#include "lecc/continual/metrics.hpp"
#include "lecc/nn/rng.hpp"

namespace lecc::testing {

/// Aggregation written the long way: an explicit array over every class id
/// up to the largest seen, explicit per-adapter z-scores, explicit
/// latest-round overwrite and a left-to-right argmax.
inline std::uint32_t brute_force_predict(const std::vector<continual::AdapterLogits>& outputs) {
  std::uint32_t max_class = 0;
  for (const auto& o : outputs)
    for (auto c : o.classes) max_class = std::max(max_class, c);
  std::vector<double> table(max_class + 1, 0.0);
  std::vector<bool> present(max_class + 1, false);
  std::vector<std::uint32_t> writer_round(max_class + 1, 0);
  for (const auto& o : outputs) {
    const double n = static_cast<double>(o.logits.size());
    double mean = 0.0;
    for (float v : o.logits) mean += v;
    mean /= n;
    double ss = 0.0;
    for (float v : o.logits) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / n);
    for (std::size_t i = 0; i < o.classes.size(); ++i) {
      const auto c = o.classes[i];
      if (present[c] && writer_round[c] > o.round_id) continue;
      table[c] = sd > 0.0 ? (o.logits[i] - mean) / sd : 0.0;
      present[c] = true;
      writer_round[c] = o.round_id;
    }
  }
  std::uint32_t best = 0;
  bool found = false;
  for (std::uint32_t c = 0; c <= max_class; ++c) {
    if (!present[c]) continue;
    if (!found || table[c] > table[best]) {
      best = c;
      found = true;
    }
  }
  return best;
}

/// Random adapter outputs in round order: 1 to 4 adapters, each over a
/// random class subset of 0..7, with occasional constant logit vectors.
inline std::vector<continual::AdapterLogits> random_outputs(nn::Rng& rng) {
  const std::size_t n = 1 + rng.index(4);
  std::vector<continual::AdapterLogits> out;
  std::uint32_t round = 0;
  for (std::size_t a = 0; a < n; ++a) {
    round += static_cast<std::uint32_t>(1 + rng.index(2));
    continual::AdapterLogits o;
    o.round_id = round;
    std::set<std::uint32_t> cls;
    const std::size_t width = 1 + rng.index(5);
    while (cls.size() < width) cls.insert(static_cast<std::uint32_t>(rng.index(8)));
    o.classes.assign(cls.begin(), cls.end());
    const bool constant = rng.index(10) == 0;
    for (std::size_t i = 0; i < width; ++i) {
      // Coarse values make exact ties common.
      o.logits.push_back(constant ? 1.0f : static_cast<float>(static_cast<int>(rng.index(7)) - 3) * 0.5f);
    }
    out.push_back(std::move(o));
  }
  return out;
}

struct OracleMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Metrics from direct pair counting over the union of labels, no matrix.
inline OracleMetrics metrics_oracle(const std::vector<std::uint32_t>& truth, const std::vector<std::uint32_t>& pred) {
  std::set<std::uint32_t> labels(truth.begin(), truth.end());
  labels.insert(pred.begin(), pred.end());
  OracleMetrics m;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == pred[i];
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  for (auto c : labels) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (pred[i] == c && truth[i] == c) ++tp;
      if (pred[i] == c && truth[i] != c) ++fp;
      if (pred[i] != c && truth[i] == c) ++fn;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.precision += p;
    m.recall += r;
    m.f1 += 2 * tp + fp + fn > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
  }
  const double k = static_cast<double>(labels.size());
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  return m;
}

}  // namespace lecc::testing
