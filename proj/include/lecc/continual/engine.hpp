// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lecc/continual/aggregate.hpp"
#include "lecc/continual/metrics.hpp"
#include "lecc/data/labels.hpp"
#include "lecc/data/text.hpp"
#include "lecc/lora/adapter.hpp"
#include "lecc/model/transformer.hpp"
#include "lecc/nn/adamw.hpp"

namespace lecc::continual {

enum class Mode { full, lora };

std::string mode_name(Mode mode);
/// Accepts "full", "full-finetune", "lora" and "lora-only".
Mode parse_mode(const std::string& name);

struct TrainSpec {
  std::size_t epochs = 15;
  double learning_rate = 2e-5;
  double weight_decay = 0.01;
  std::size_t batch_size = 16;
  Mode mode = Mode::lora;
  std::uint64_t seed = 1;
  /// Share of each earlier class's training samples replayed in later
  /// rounds. 0 means strict no-replay.
  double rehearsal_fraction = 0.0;
  /// Start each round's adapter and head from the previous round's values
  /// instead of a fresh initialization.
  bool warm_start = false;
  /// Epochs after which validation metrics are recorded. The final epoch is
  /// always recorded.
  std::vector<std::size_t> checkpoints = {1, 2, 5, 10, 15};

  /// Spec error for epochs < 4, non-positive rates or batch size.
  void validate() const;
  bool records_epoch(std::size_t epoch) const;
};

/// A tokenized flow with its global class id.
struct Sample {
  std::vector<data::TokenId> ids;
  ClassId label = 0;
};

std::vector<Sample> encode_samples(std::span<const data::FlowRecord> records, const data::LabelCodec& codec,
                                   const data::TokenVocab& vocab, std::size_t max_len);

/// One validation checkpoint. Loss is the mean training loss of the epoch.
struct EpochRecord {
  std::uint32_t round = 0;
  std::uint32_t epoch = 0;
  double loss = 0.0;
  Metrics metrics;
  ConfusionMatrix confusion;
};

/// Everything carried from one round to the next.
struct RoundState {
  /// Rounds completed so far.
  std::uint32_t rounds_done = 0;
  std::vector<ClassId> known;
  lora::AdapterBundle bundle;
  /// Head of the most recent round (the full-mode model's head, or the
  /// newest adapter's head).
  std::optional<model::ClassificationHead> head;
};

/// Per-adapter logits on a fixed, append-only list of evaluation samples.
/// Valid only while the backbone stays frozen.
class LogitCache {
 public:
  /// Logits of every bundle adapter for sample i, computing what is missing.
  void fill(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
            std::span<const Sample> samples);
  const std::vector<AdapterLogits>& at(std::size_t i) const { return rows_.at(i); }

 private:
  std::vector<std::vector<AdapterLogits>> rows_;
};

struct RoundInput {
  std::uint32_t round_id = 0;
  /// Classes introduced in this round.
  std::vector<ClassId> new_classes;
  /// Training samples (new-round data plus any rehearsal).
  std::vector<Sample> train;
  /// Cumulative validation set for the classes known after this round.
  std::vector<Sample> test;
};

struct RoundOutcome {
  std::vector<EpochRecord> epochs;
  /// Predictions of the final model on RoundInput::test.
  std::vector<ClassId> predictions;
};

/// Trains one round. In lora mode the backbone must be frozen; a new adapter
/// covering the cumulative known classes is appended to state.bundle. In full
/// mode every backbone parameter and the expanded head are updated in place.
RoundOutcome train_round(model::Backbone& backbone, const RoundInput& input, const TrainSpec& spec,
                         const lora::LoraConfig& lora_config, RoundState& state,
                         LogitCache* cache = nullptr);

/// Argmax over a logit row, ties to the lowest index.
std::size_t argmax(std::span<const float> row);

/// Predictions of a single model (no adapters) over the head's classes.
std::vector<ClassId> predict_single(const model::Backbone& backbone, const model::ClassificationHead& head,
                                    std::span<const Sample> samples);
/// Multi-adapter predictions for every sample.
std::vector<ClassId> predict_bundle(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                                    std::span<const Sample> samples);

/// Copies the rows of `old` for classes it shares with `classes`; other rows
/// are freshly initialized.
model::ClassificationHead expand_head(const std::optional<model::ClassificationHead>& old,
                                      std::span<const ClassId> classes, std::size_t width,
                                      std::uint64_t seed);

using EpochHook = std::function<void(std::size_t epoch, double mean_loss)>;

/// Mean cross-entropy training over `samples` for `epochs`, batches of
/// `batch_size` shuffled per epoch. Returns the mean loss of each epoch and
/// calls `hook` (if set) after every epoch.
std::vector<double> fit(model::ForwardPass& pass, const model::ClassificationHead& head,
                        std::vector<nn::Parameter*> params, std::span<const Sample> samples,
                        std::size_t epochs, std::size_t batch_size, const nn::AdamWOptions& opt,
                        std::uint64_t seed, const EpochHook& hook = {});

struct PretrainSpec {
  /// "none", "round0" (supervised on the first round's training data),
  /// "binary" (Attack_label on records held out of every split) or "masked"
  /// (recover masked tokens of the held-out records; no labels used).
  std::string objective = "none";
  std::size_t epochs = 3;
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  /// Upper bound on pool samples used by the pool objectives.
  std::size_t pool_limit = 2000;
  /// Masked objective: share of eligible positions hidden per sequence, and
  /// the minimum pool frequency for a token to be a prediction target.
  double mask_rate = 0.15;
  std::size_t min_count = 5;
};

/// Trains all backbone weights against a throwaway head over `samples`.
void pretrain_backbone(model::Backbone& backbone, std::span<const Sample> samples, const PretrainSpec& spec,
                       std::uint64_t seed);

/// Self-supervised pretraining: frequent tokens are replaced by UNK and
/// predicted from the final hidden state at their position.
void pretrain_masked(model::Backbone& backbone, std::span<const std::vector<data::TokenId>> sequences,
                     const PretrainSpec& spec, std::uint64_t seed);

struct ForgettingEntry {
  std::uint32_t earlier_round = 0;
  std::uint32_t current_round = 0;
  double f1_before = 0.0;
  double f1_after = 0.0;
  double drop() const noexcept { return f1_before - f1_after; }
};

struct ForgettingReport {
  std::vector<ForgettingEntry> entries;
};

/// Macro-F1 (over the subset's own classes) of the current bundle on each
/// earlier round's test subset, compared
/// with the value recorded right after that round. `round_tests[r]` holds
/// round r's test samples; `f1_after_round[r]` the value right after round
/// r. Empty for a single-round bundle.
ForgettingReport forgetting_eval(const model::Backbone& backbone, const lora::AdapterBundle& bundle,
                                 std::span<const std::vector<Sample>> round_tests,
                                 std::span<const double> f1_after_round);

}  // namespace lecc::continual
