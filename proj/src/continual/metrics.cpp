// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/continual/metrics.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "lecc/error.hpp"

namespace lecc::continual {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t n = 0;
  for (const auto& row : counts)
    for (auto c : row) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) n += counts[i][i];
  return n;
}

ConfusionMatrix confusion_matrix(std::span<const ClassId> truth, std::span<const ClassId> predicted,
                                 std::optional<std::span<const ClassId>> labels) {
  if (truth.size() != predicted.size()) {
    fail(Errc::data, "truth has " + std::to_string(truth.size()) + " entries, predictions " +
                         std::to_string(predicted.size()));
  }
  ConfusionMatrix cm;
  if (labels) {
    std::set<ClassId> uniq(labels->begin(), labels->end());
    cm.labels.assign(uniq.begin(), uniq.end());
  } else {
    std::set<ClassId> uniq(truth.begin(), truth.end());
    uniq.insert(predicted.begin(), predicted.end());
    cm.labels.assign(uniq.begin(), uniq.end());
  }
  const std::size_t k = cm.labels.size();
  cm.counts.assign(k, std::vector<std::uint64_t>(k, 0));
  auto index_of = [&](ClassId c) {
    auto it = std::lower_bound(cm.labels.begin(), cm.labels.end(), c);
    if (it == cm.labels.end() || *it != c) {
      fail(Errc::label, "class id " + std::to_string(c) + " is not in the label list");
    }
    return static_cast<std::size_t>(it - cm.labels.begin());
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[index_of(truth[i])][index_of(predicted[i])];
  return cm;
}

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm) {
  const std::size_t k = cm.labels.size();
  std::vector<ClassScores> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::uint64_t tp = cm.counts[c][c], fp = 0, fn = 0;
    for (std::size_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += cm.counts[o][c];
      fn += cm.counts[c][o];
    }
    ClassScores& s = out[c];
    s.label = cm.labels[c];
    s.support = tp + fn;
    s.precision = ratio(double(tp), double(tp + fp));
    s.recall = ratio(double(tp), double(tp + fn));
    // Equal to the harmonic mean of precision and recall, computed from counts.
    s.f1 = ratio(2.0 * double(tp), double(2 * tp + fp + fn));
  }
  return out;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  Metrics m;
  m.accuracy = ratio(double(cm.trace()), double(cm.total()));
  const auto scores = per_class_scores(cm);
  if (scores.empty()) return m;
  for (const auto& s : scores) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const double k = double(scores.size());
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  return m;
}

Metrics evaluate(std::span<const ClassId> truth, std::span<const ClassId> predicted, ConfusionMatrix* cm_out) {
  if (truth.empty()) fail(Errc::data, "cannot evaluate an empty test set");
  ConfusionMatrix cm = confusion_matrix(truth, predicted);
  Metrics m = compute_metrics(cm);
  if (cm_out) *cm_out = std::move(cm);
  return m;
}

double truth_macro_f1(std::span<const ClassId> truth, std::span<const ClassId> predicted) {
  if (truth.empty()) fail(Errc::data, "cannot evaluate an empty test set");
  const std::set<ClassId> present(truth.begin(), truth.end());
  double sum = 0.0;
  for (const auto& s : per_class_scores(confusion_matrix(truth, predicted)))
    if (present.count(s.label)) sum += s.f1;
  return sum / static_cast<double>(present.size());
}

}  // namespace lecc::continual
