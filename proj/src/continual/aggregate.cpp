// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/continual/aggregate.hpp"

#include <cmath>
#include <map>

#include "lecc/error.hpp"

namespace lecc::continual {

std::vector<double> zscore(std::span<const float> logits) {
  std::vector<double> z(logits.size(), 0.0);
  if (logits.empty()) return z;
  double mean = 0.0;
  for (float v : logits) mean += v;
  mean /= double(logits.size());
  double var = 0.0;
  for (float v : logits) var += (v - mean) * (v - mean);
  var /= double(logits.size());
  if (!(var > 0.0)) return z;
  const double sd = std::sqrt(var);
  for (std::size_t i = 0; i < logits.size(); ++i) z[i] = (logits[i] - mean) / sd;
  return z;
}

Prediction aggregate_logits(std::span<const AdapterLogits> outputs) {
  if (outputs.empty()) fail(Errc::state, "no adapters to aggregate");
  std::map<ClassId, double> unified;
  for (const auto& out : outputs) {
    if (out.classes.size() != out.logits.size()) {
      fail(Errc::dimension, "adapter emitted " + std::to_string(out.logits.size()) + " logits for " +
                                std::to_string(out.classes.size()) + " classes");
    }
    const auto z = zscore(out.logits);
    for (std::size_t i = 0; i < z.size(); ++i) unified[out.classes[i]] = z[i];
  }
  Prediction p;
  p.scores.assign(unified.begin(), unified.end());
  double best = 0.0;
  bool first = true;
  for (const auto& [cls, score] : p.scores) {
    if (first || score > best) {
      best = score;
      p.label = cls;
      first = false;
    }
  }
  return p;
}

void check_bundle_for(const model::Backbone& backbone, const lora::AdapterBundle& bundle) {
  if (bundle.empty()) fail(Errc::state, "adapter bundle is empty");
  const std::uint32_t fp = model::backbone_fingerprint(backbone);
  for (const auto& a : bundle.adapters) {
    if (a.backbone_fingerprint != fp) {
      fail(Errc::compatibility, "adapter for round " + std::to_string(a.round_id) +
                                    " was trained against a different backbone");
    }
  }
}

std::vector<AdapterLogits> bundle_logits(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                                         std::span<const data::TokenId> ids) {
  std::vector<AdapterLogits> outs;
  outs.reserve(bundle.size());
  const std::size_t layers = backbone.config().layers;
  for (const auto& a : bundle.adapters) {
    const auto att = a.attachment(layers);
    const nn::Matrix logits = model::forward(backbone, &att, a.head, ids);
    AdapterLogits o;
    o.round_id = a.round_id;
    o.classes = a.classes();
    o.logits.assign(logits.values().begin(), logits.values().end());
    outs.push_back(std::move(o));
  }
  return outs;
}

Prediction multi_round_predict(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                               std::span<const data::TokenId> ids) {
  check_bundle_for(backbone, bundle);
  return aggregate_logits(bundle_logits(backbone, bundle, ids));
}

}  // namespace lecc::continual
