// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/continual/engine.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "lecc/error.hpp"
#include "lecc/nn/rng.hpp"
#include "lecc/parallel.hpp"

namespace lecc::continual {

namespace {

std::size_t head_index(const model::ClassificationHead& head, ClassId c) {
  auto it = std::lower_bound(head.classes.begin(), head.classes.end(), c);
  if (it == head.classes.end() || *it != c) {
    fail(Errc::label, "class id " + std::to_string(c) + " is not covered by the head");
  }
  return static_cast<std::size_t>(it - head.classes.begin());
}

std::vector<ClassId> truths(std::span<const Sample> samples) {
  std::vector<ClassId> t;
  t.reserve(samples.size());
  for (const auto& s : samples) t.push_back(s.label);
  return t;
}

AdapterLogits adapter_logits(const model::Backbone& backbone, const lora::LoraAdapter& adapter,
                             const model::LoraAttachment& att, std::span<const data::TokenId> ids) {
  const nn::Matrix logits = model::forward(backbone, &att, adapter.head, ids);
  AdapterLogits o;
  o.round_id = adapter.round_id;
  o.classes = adapter.classes();
  o.logits.assign(logits.values().begin(), logits.values().end());
  return o;
}

EpochRecord make_record(std::uint32_t round, std::size_t epoch, double loss, std::span<const Sample> test,
                        std::span<const ClassId> preds) {
  EpochRecord rec;
  rec.round = round;
  rec.epoch = static_cast<std::uint32_t>(epoch);
  rec.loss = loss;
  const auto t = truths(test);
  rec.metrics = evaluate(t, preds, &rec.confusion);
  return rec;
}

}  // namespace

std::string mode_name(Mode mode) { return mode == Mode::full ? "full" : "lora"; }

Mode parse_mode(const std::string& name) {
  if (name == "full" || name == "full-finetune") return Mode::full;
  if (name == "lora" || name == "lora-only") return Mode::lora;
  fail(Errc::config, "unknown training mode '" + name + "'");
}

void TrainSpec::validate() const {
  if (epochs < 4) fail(Errc::spec, "at least 4 epochs are required, got " + std::to_string(epochs));
  if (!(learning_rate > 0.0)) fail(Errc::spec, "learning rate must be positive");
  if (weight_decay < 0.0) fail(Errc::spec, "weight decay must be non-negative");
  if (batch_size == 0) fail(Errc::spec, "batch size must be positive");
  if (rehearsal_fraction < 0.0 || rehearsal_fraction > 1.0) {
    fail(Errc::spec, "rehearsal fraction must lie in [0, 1]");
  }
}

bool TrainSpec::records_epoch(std::size_t epoch) const {
  return epoch == epochs || std::find(checkpoints.begin(), checkpoints.end(), epoch) != checkpoints.end();
}

std::vector<Sample> encode_samples(std::span<const data::FlowRecord> records, const data::LabelCodec& codec,
                                   const data::TokenVocab& vocab, std::size_t max_len) {
  std::vector<Sample> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back(Sample{data::tokenize(data::textualize(r), vocab, max_len), codec.encode(r.attack_type)});
  }
  return out;
}

void LogitCache::fill(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                      std::span<const Sample> samples) {
  if (samples.size() < rows_.size()) fail(Errc::state, "logit cache samples may only grow");
  rows_.resize(samples.size());
  std::vector<model::LoraAttachment> atts;
  for (const auto& a : bundle.adapters) atts.push_back(a.attachment(backbone.config().layers));
  parallel_for(samples.size(), [&](std::size_t i) {
    auto& row = rows_[i];
    for (std::size_t k = row.size(); k < bundle.size(); ++k) {
      row.push_back(adapter_logits(backbone, bundle.adapters[k], atts[k], samples[i].ids));
    }
  });
}

std::size_t argmax(std::span<const float> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] > row[best]) best = i;
  return best;
}

std::vector<ClassId> predict_single(const model::Backbone& backbone, const model::ClassificationHead& head,
                                    std::span<const Sample> samples) {
  std::vector<ClassId> preds(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const nn::Matrix logits = model::forward(backbone, nullptr, head, samples[i].ids);
    preds[i] = head.classes[argmax(logits.values())];
  });
  return preds;
}

std::vector<ClassId> predict_bundle(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                                    std::span<const Sample> samples) {
  check_bundle_for(backbone, bundle);
  std::vector<ClassId> preds(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    preds[i] = aggregate_logits(bundle_logits(backbone, bundle, samples[i].ids)).label;
  });
  return preds;
}

model::ClassificationHead expand_head(const std::optional<model::ClassificationHead>& old,
                                      std::span<const ClassId> classes, std::size_t width,
                                      std::uint64_t seed) {
  model::ClassificationHead head = model::attach_head(classes, width, seed);
  if (!old) return head;
  if (old->weight.value.cols() != width) fail(Errc::dimension, "previous head width does not match");
  for (std::size_t r = 0; r < head.classes.size(); ++r) {
    auto it = std::lower_bound(old->classes.begin(), old->classes.end(), head.classes[r]);
    if (it == old->classes.end() || *it != head.classes[r]) continue;
    const std::size_t o = static_cast<std::size_t>(it - old->classes.begin());
    std::copy(old->weight.value.row(o).begin(), old->weight.value.row(o).end(), head.weight.value.row(r).begin());
    head.bias.value(0, r) = old->bias.value(0, o);
  }
  return head;
}

std::vector<double> fit(model::ForwardPass& pass, const model::ClassificationHead& head,
                        std::vector<nn::Parameter*> params, std::span<const Sample> samples,
                        std::size_t epochs, std::size_t batch_size, const nn::AdamWOptions& opt,
                        std::uint64_t seed, const EpochHook& hook) {
  if (samples.empty()) fail(Errc::data, "no training samples");
  if (batch_size == 0) fail(Errc::spec, "batch size must be positive");
  std::vector<std::uint32_t> targets(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    targets[i] = static_cast<std::uint32_t>(head_index(head, samples[i].label));

  nn::AdamW optimizer(std::move(params), opt);
  nn::Rng rng(seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> losses;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      const float inv = 1.0f / static_cast<float>(end - start);
      optimizer.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        const nn::Matrix logits = pass.run(samples[i].ids);
        const std::uint32_t t[1] = {targets[i]};
        auto loss = nn::cross_entropy(logits, std::span<const std::uint32_t>(t, 1));
        total += loss.loss;
        nn::scale_inplace(loss.grad, inv);
        pass.backward(loss.grad);
      }
      optimizer.step();
    }
    losses.push_back(total / double(samples.size()));
    if (hook) hook(epoch, losses.back());
  }
  return losses;
}

RoundOutcome train_round(model::Backbone& backbone, const RoundInput& input, const TrainSpec& spec,
                         const lora::LoraConfig& lora_config, RoundState& state, LogitCache* cache) {
  spec.validate();
  if (input.train.empty()) fail(Errc::data, "round " + std::to_string(input.round_id) + " has no training data");
  if (input.test.empty()) fail(Errc::data, "round " + std::to_string(input.round_id) + " has no test data");

  std::set<ClassId> known_set(state.known.begin(), state.known.end());
  for (ClassId c : input.new_classes) {
    if (!known_set.insert(c).second) {
      fail(Errc::schedule, "class " + std::to_string(c) + " was already introduced before round " +
                               std::to_string(input.round_id));
    }
  }
  const std::vector<ClassId> known(known_set.begin(), known_set.end());
  const std::size_t width = backbone.config().width;
  const std::uint64_t seed = nn::derive_seed(spec.seed, input.round_id);
  const nn::AdamWOptions opt{.learning_rate = spec.learning_rate, .weight_decay = spec.weight_decay};

  RoundOutcome out;
  if (spec.mode == Mode::lora) {
    if (!backbone.frozen()) fail(Errc::state, "lora-only training requires a frozen backbone");
    LogitCache local;
    if (!cache) cache = &local;
    const std::uint32_t fingerprint = model::backbone_fingerprint(backbone);
    if (!state.bundle.empty() && state.bundle.backbone_fingerprint != fingerprint) {
      fail(Errc::compatibility, "bundle was built on a different backbone");
    }

    lora::LoraAdapter adapter = lora::init_adapter(lora_config, backbone, input.round_id, known,
                                                   nn::derive_seed(seed, 1));
    if (spec.warm_start && !state.bundle.empty()) {
      const lora::LoraAdapter& prev = state.bundle.adapters.back();
      if (prev.entries.size() == adapter.entries.size() && prev.config.rank == adapter.config.rank) {
        for (std::size_t e = 0; e < adapter.entries.size(); ++e) {
          adapter.entries[e].a.value = prev.entries[e].a.value;
          adapter.entries[e].b.value = prev.entries[e].b.value;
        }
      }
      adapter.head = expand_head(state.head, known, width, nn::derive_seed(seed, 2));
    }
    const model::LoraAttachment att = adapter.attachment(backbone.config().layers);
    model::ForwardPass pass(backbone, &att, adapter.head);

    auto validate_epoch = [&](std::size_t epoch, double loss) {
      if (!spec.records_epoch(epoch)) return;
      cache->fill(backbone, state.bundle, input.test);
      std::vector<ClassId> preds(input.test.size());
      parallel_for(input.test.size(), [&](std::size_t i) {
        std::vector<AdapterLogits> outs = cache->at(i);
        outs.push_back(adapter_logits(backbone, adapter, att, input.test[i].ids));
        preds[i] = aggregate_logits(outs).label;
      });
      out.epochs.push_back(make_record(input.round_id, epoch, loss, input.test, preds));
      out.predictions = std::move(preds);
    };
    fit(pass, adapter.head, adapter.trainable_parameters(), input.train, spec.epochs, spec.batch_size, opt,
        nn::derive_seed(seed, 3), validate_epoch);

    if (model::backbone_fingerprint(backbone) != fingerprint) {
      fail(Errc::consistency, "backbone weights changed during lora-only training");
    }
    state.head = adapter.head;
    state.bundle.add(std::move(adapter));
  } else {
    backbone.set_frozen(false);
    model::ClassificationHead head = expand_head(state.head, known, width, nn::derive_seed(seed, 2));
    model::ForwardPass pass(backbone, nullptr, head);
    std::vector<nn::Parameter*> params = backbone.parameters();
    params.push_back(&head.weight);
    params.push_back(&head.bias);
    auto validate_epoch = [&](std::size_t epoch, double loss) {
      if (!spec.records_epoch(epoch)) return;
      auto preds = predict_single(backbone, head, input.test);
      out.epochs.push_back(make_record(input.round_id, epoch, loss, input.test, preds));
      out.predictions = std::move(preds);
    };
    fit(pass, head, std::move(params), input.train, spec.epochs, spec.batch_size, opt, nn::derive_seed(seed, 3),
        validate_epoch);
    state.head = std::move(head);
  }
  state.known = known;
  ++state.rounds_done;
  return out;
}

void pretrain_backbone(model::Backbone& backbone, std::span<const Sample> samples, const PretrainSpec& spec,
                       std::uint64_t seed) {
  if (samples.empty()) fail(Errc::data, "no pretraining samples");
  std::set<ClassId> classes;
  for (const auto& s : samples) classes.insert(s.label);
  const std::vector<ClassId> ids(classes.begin(), classes.end());
  model::ClassificationHead head = model::attach_head(ids, backbone.config().width, nn::derive_seed(seed, 1));
  backbone.set_frozen(false);
  model::ForwardPass pass(backbone, nullptr, head);
  std::vector<nn::Parameter*> params = backbone.parameters();
  params.push_back(&head.weight);
  params.push_back(&head.bias);
  const nn::AdamWOptions opt{.learning_rate = spec.learning_rate};
  fit(pass, head, std::move(params), samples, spec.epochs, spec.batch_size, opt, nn::derive_seed(seed, 2));
}

void pretrain_masked(model::Backbone& backbone, std::span<const std::vector<data::TokenId>> sequences,
                     const PretrainSpec& spec, std::uint64_t seed) {
  if (sequences.empty()) fail(Errc::data, "no pretraining sequences");
  if (!(spec.mask_rate > 0.0 && spec.mask_rate < 1.0)) fail(Errc::config, "mask rate must lie in (0, 1)");
  const std::size_t vocab = backbone.config().vocab_size;
  const std::size_t width = backbone.config().width;
  std::vector<std::size_t> counts(vocab, 0);
  for (const auto& seq : sequences)
    for (data::TokenId t : seq)
      if (t > data::kClsId && t < vocab) ++counts[t];
  std::vector<int> target_of(vocab, -1);
  std::size_t n_targets = 0;
  for (std::size_t t = 0; t < vocab; ++t)
    if (counts[t] >= spec.min_count) target_of[t] = static_cast<int>(n_targets++);
  if (n_targets == 0) fail(Errc::data, "no token is frequent enough to serve as a masked target");

  nn::Rng rng(seed);
  nn::Parameter out_w(rng.normal_matrix<float>(n_targets, width, 0.02));
  nn::Parameter out_b(nn::Matrix(1, n_targets));
  const ClassId only[1] = {0};
  model::ClassificationHead unused = model::attach_head(only, width, seed);
  backbone.set_frozen(false);
  model::ForwardPass pass(backbone, nullptr, unused);
  std::vector<nn::Parameter*> params = backbone.parameters();
  params.push_back(&out_w);
  params.push_back(&out_b);
  nn::AdamW optimizer(params, nn::AdamWOptions{.learning_rate = spec.learning_rate});

  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
      const std::size_t end = std::min(order.size(), start + spec.batch_size);
      const float inv = 1.0f / static_cast<float>(end - start);
      optimizer.zero_grad();
      for (std::size_t k = start; k < end; ++k) {
        std::vector<data::TokenId> ids = sequences[order[k]];
        std::vector<std::size_t> eligible;
        for (std::size_t i = 1; i < ids.size(); ++i)
          if (ids[i] < vocab && target_of[ids[i]] >= 0) eligible.push_back(i);
        if (eligible.empty()) continue;
        rng.shuffle(eligible.begin(), eligible.end());
        const auto m = std::max<std::size_t>(1, std::llround(spec.mask_rate * double(eligible.size())));
        eligible.resize(std::min(m, eligible.size()));
        std::sort(eligible.begin(), eligible.end());
        std::vector<std::uint32_t> targets;
        for (std::size_t i : eligible) {
          targets.push_back(static_cast<std::uint32_t>(target_of[ids[i]]));
          ids[i] = data::kUnkId;
        }
        const nn::Matrix hidden = pass.run_hidden(ids);
        nn::Matrix picked(eligible.size(), width);
        for (std::size_t r = 0; r < eligible.size(); ++r) {
          const auto row = hidden.row(eligible[r]);
          std::copy(row.begin(), row.end(), picked.row(r).begin());
        }
        nn::Linear<float> out(out_w, &out_b);
        auto loss = nn::cross_entropy(out.forward(picked), targets);
        nn::scale_inplace(loss.grad, inv);
        const nn::Matrix dpicked = out.backward(loss.grad);
        nn::Matrix dhidden(hidden.rows(), width);
        for (std::size_t r = 0; r < eligible.size(); ++r) {
          const auto row = dpicked.row(r);
          std::copy(row.begin(), row.end(), dhidden.row(eligible[r]).begin());
        }
        pass.backward_hidden(dhidden);
      }
      optimizer.step();
    }
  }
}

ForgettingReport forgetting_eval(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                                 std::span<const std::vector<Sample>> round_tests,
                                 std::span<const double> f1_after_round) {
  ForgettingReport report;
  if (bundle.empty()) return report;
  const std::uint32_t current = bundle.adapters.back().round_id;
  if (current == 0) return report;
  if (round_tests.size() < current || f1_after_round.size() < current) {
    fail(Errc::data, "forgetting evaluation needs the test subset and score of every earlier round");
  }
  for (std::uint32_t r = 0; r < current; ++r) {
    const auto preds = predict_bundle(backbone, bundle, round_tests[r]);
    const auto t = truths(round_tests[r]);
    report.entries.push_back(ForgettingEntry{r, current, f1_after_round[r], truth_macro_f1(t, preds)});
  }
  return report;
}

}  // namespace lecc::continual
