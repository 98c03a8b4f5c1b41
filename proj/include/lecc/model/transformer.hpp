// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lecc/bytes.hpp"
#include "lecc/data/labels.hpp"
#include "lecc/data/text.hpp"
#include "lecc/nn/layers.hpp"
#include "lecc/nn/parameter.hpp"

namespace lecc::model {

using data::ClassId;
using data::TokenId;

struct BackboneConfig {
  std::size_t layers = 2;
  std::size_t width = 64;
  std::size_t heads = 4;
  std::size_t ff_width = 128;
  std::size_t vocab_size = 0;
  std::size_t max_len = data::kDefaultMaxLen;
  std::uint64_t seed = 1;

  /// Throws a config error for zero sizes or width not divisible by heads.
  void validate() const;
  bool operator==(const BackboneConfig&) const = default;
};

/// Named architecture presets: "desk" (default), and "distilbert",
/// "distilgpt2", "tinyt5", which differ only in depth and width (the
/// feed-forward width is twice the model width). vocab_size is left 0.
BackboneConfig backbone_preset(const std::string& name);

struct BlockParams {
  nn::Parameter wq, wk, wv, wo;
  nn::Parameter w1, w2;
  nn::Parameter ln1_gain, ln1_bias;
  nn::Parameter ln2_gain, ln2_bias;
};

/// Frozen-capable micro-transformer encoder weights.
class Backbone {
 public:
  Backbone() = default;
  explicit Backbone(const BackboneConfig& config);

  const BackboneConfig& config() const noexcept { return config_; }
  bool frozen() const noexcept { return frozen_; }
  void set_frozen(bool frozen);

  nn::Parameter token_embedding;
  nn::Parameter position_embedding;
  std::vector<BlockParams> blocks;

  /// Parameters in declaration (checkpoint) order.
  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;

 private:
  BackboneConfig config_;
  bool frozen_ = false;
};

/// Weights ~ Normal(0, 0.02²), layer norms at identity. Deterministic per seed.
Backbone init_backbone(const BackboneConfig& config);

/// Closed-form parameter count: V·d + M·d + L·(4d² + 2·d·f + 4d).
std::size_t backbone_param_count(const BackboneConfig& config);
std::size_t count_params(const Backbone& backbone);

struct ClassificationHead {
  nn::Parameter weight;  ///< |C|×d
  nn::Parameter bias;    ///< 1×|C|
  std::vector<ClassId> classes;

  std::size_t width() const noexcept { return classes.size(); }
  std::size_t param_count() const noexcept { return weight.count() + bias.count(); }
};

/// Fresh head bound to a non-empty, strictly increasing class list.
ClassificationHead attach_head(std::span<const ClassId> classes, std::size_t width, std::uint64_t seed);

/// One low-rank pair feeding a projection.
struct LoraSlot {
  nn::Parameter* a = nullptr;
  nn::Parameter* b = nullptr;
  float scale = 1.0f;
};

/// Per-layer optional LoRA branches on the query and value projections.
struct LoraAttachment {
  std::vector<std::optional<LoraSlot>> query;
  std::vector<std::optional<LoraSlot>> value;
};

/// Forward/backward context for one token sequence. Trailing PAD tokens are
/// trimmed before computation; they can never influence the CLS position.
class ForwardPass {
 public:
  ForwardPass(Backbone& backbone, const LoraAttachment* lora, ClassificationHead& head);

  /// Returns the 1×|C| logit row.
  nn::Matrix run(std::span<const TokenId> ids);
  /// Final hidden states (n×d after trimming trailing PAD), skipping the
  /// pooling and the head.
  nn::Matrix run_hidden(std::span<const TokenId> ids);
  /// Pooled CLS representation from the last run().
  const nn::Matrix& pooled() const noexcept { return pooled_; }
  /// Attention weights of every layer from the last run(), [layer][head].
  std::vector<std::vector<nn::Matrix>> attention_weights() const;

  /// Back-propagates d(loss)/d(logits); writes gradients of trainable
  /// parameters only.
  void backward(const nn::Matrix& dlogits);
  /// Back-propagates d(loss)/d(hidden) after run_hidden() or run().
  void backward_hidden(const nn::Matrix& dhidden);

 private:
  struct Block {
    nn::MultiHeadAttention<float> attn;
    nn::LayerNorm<float> ln1;
    nn::FeedForward<float> ff;
    nn::LayerNorm<float> ln2;
  };

  Backbone* backbone_;
  ClassificationHead* head_;
  nn::Embedding<float> tokens_;
  nn::Embedding<float> positions_;
  std::vector<Block> blocks_;
  nn::ClsPool<float> pool_;
  nn::Linear<float> head_linear_;
  nn::Matrix pooled_;
  bool ran_ = false;
  bool hidden_ran_ = false;
};

/// Inference-only logits. Neither the backbone, adapter nor head is modified.
nn::Matrix forward(const Backbone& backbone, const LoraAttachment* lora,
                   const ClassificationHead& head, std::span<const TokenId> ids);

/// MBKB checkpoint: magic, version u16, config block, parameters as LE f32
/// in declaration order, trailing CRC-32.
Bytes save_backbone(const Backbone& backbone);
Backbone load_backbone(std::span<const std::uint8_t> bytes);
/// CRC-32 of the checkpoint bytes before the trailing CRC (equal to it).
std::uint32_t backbone_fingerprint(const Backbone& backbone);

}  // namespace lecc::model
