// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/model/transformer.hpp"

#include <algorithm>

#include "lecc/error.hpp"
#include "lecc/nn/rng.hpp"

namespace lecc::model {

namespace {

constexpr char kMagic[] = "MBKB";
constexpr std::uint16_t kVersion = 1;
constexpr double kInitStd = 0.02;

nn::Parameter ones_row(std::size_t n) { return nn::Parameter(nn::Matrix(1, n, 1.0f)); }
nn::Parameter zeros_row(std::size_t n) { return nn::Parameter(nn::Matrix(1, n, 0.0f)); }

}  // namespace

void BackboneConfig::validate() const {
  if (layers == 0 || width == 0 || heads == 0 || ff_width == 0 || max_len == 0) {
    fail(Errc::config, "backbone dimensions must be positive");
  }
  if (vocab_size <= data::kClsId) fail(Errc::config, "backbone vocab_size must exceed the reserved ids");
  if (width % heads != 0) {
    fail(Errc::config, "width " + std::to_string(width) + " is not divisible by " +
                           std::to_string(heads) + " heads");
  }
}

BackboneConfig backbone_preset(const std::string& name) {
  BackboneConfig c;
  if (name == "desk") {
    c.layers = 2;
    c.width = 64;
  } else if (name == "distilbert") {
    c.layers = 6;
    c.width = 384;
  } else if (name == "distilgpt2") {
    c.layers = 4;
    c.width = 128;
  } else if (name == "tinyt5") {
    c.layers = 2;
    c.width = 32;
  } else {
    fail(Errc::config, "unknown backbone preset " + name);
  }
  c.heads = 4;
  c.ff_width = 2 * c.width;
  c.vocab_size = 0;
  return c;
}

Backbone::Backbone(const BackboneConfig& config) : config_(config) {
  config_.validate();
  const std::size_t d = config_.width, f = config_.ff_width;
  token_embedding = nn::Parameter(nn::Matrix(config_.vocab_size, d));
  position_embedding = nn::Parameter(nn::Matrix(config_.max_len, d));
  blocks.resize(config_.layers);
  for (auto& b : blocks) {
    b.wq = nn::Parameter(nn::Matrix(d, d));
    b.wk = nn::Parameter(nn::Matrix(d, d));
    b.wv = nn::Parameter(nn::Matrix(d, d));
    b.wo = nn::Parameter(nn::Matrix(d, d));
    b.w1 = nn::Parameter(nn::Matrix(f, d));
    b.w2 = nn::Parameter(nn::Matrix(d, f));
    b.ln1_gain = ones_row(d);
    b.ln1_bias = zeros_row(d);
    b.ln2_gain = ones_row(d);
    b.ln2_bias = zeros_row(d);
  }
}

void Backbone::set_frozen(bool frozen) {
  frozen_ = frozen;
  for (nn::Parameter* p : parameters()) p->trainable = !frozen;
}

std::vector<nn::Parameter*> Backbone::parameters() {
  std::vector<nn::Parameter*> out{&token_embedding, &position_embedding};
  for (auto& b : blocks) {
    for (nn::Parameter* p : {&b.wq, &b.wk, &b.wv, &b.wo, &b.w1, &b.w2, &b.ln1_gain, &b.ln1_bias,
                             &b.ln2_gain, &b.ln2_bias}) {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<const nn::Parameter*> Backbone::parameters() const {
  auto ps = const_cast<Backbone*>(this)->parameters();
  return {ps.begin(), ps.end()};
}

Backbone init_backbone(const BackboneConfig& config) {
  Backbone bb(config);
  nn::Rng rng(config.seed);
  for (nn::Parameter* p : bb.parameters()) {
    // Layer-norm rows stay at identity.
    if (p->value.rows() == 1 && p->value.cols() == config.width && p != &bb.token_embedding &&
        p != &bb.position_embedding) {
      continue;
    }
    for (float& v : p->value.values()) v = static_cast<float>(rng.normal(0.0, kInitStd));
  }
  return bb;
}

std::size_t backbone_param_count(const BackboneConfig& c) {
  const std::size_t d = c.width, f = c.ff_width;
  return c.vocab_size * d + c.max_len * d + c.layers * (4 * d * d + 2 * d * f + 4 * d);
}

std::size_t count_params(const Backbone& backbone) {
  std::size_t n = 0;
  for (const nn::Parameter* p : backbone.parameters()) n += p->count();
  return n;
}

ClassificationHead attach_head(std::span<const ClassId> classes, std::size_t width, std::uint64_t seed) {
  if (classes.empty()) fail(Errc::config, "a classification head needs at least one class");
  for (std::size_t i = 1; i < classes.size(); ++i) {
    if (classes[i] == classes[i - 1]) fail(Errc::config, "duplicate class id " + std::to_string(classes[i]));
    if (classes[i] < classes[i - 1]) fail(Errc::config, "head class ids must be sorted");
  }
  nn::Rng rng(seed);
  ClassificationHead head;
  head.classes.assign(classes.begin(), classes.end());
  head.weight = nn::Parameter(rng.normal_matrix<float>(classes.size(), width, kInitStd));
  head.bias = nn::Parameter(nn::Matrix(1, classes.size()));
  return head;
}

// ---------------------------------------------------------------- forward

ForwardPass::ForwardPass(Backbone& backbone, const LoraAttachment* lora, ClassificationHead& head)
    : backbone_(&backbone),
      head_(&head),
      tokens_(backbone.token_embedding),
      positions_(backbone.position_embedding),
      head_linear_(head.weight, &head.bias) {
  const BackboneConfig& cfg = backbone.config();
  if (head.weight.value.cols() != cfg.width || head.bias.value.cols() != head.width() ||
      head.weight.value.rows() != head.width()) {
    fail(Errc::dimension, "head " + head.weight.value.shape_string() + " does not fit width " +
                              std::to_string(cfg.width) + " and " + std::to_string(head.width()) +
                              " classes");
  }
  if (lora && (lora->query.size() != cfg.layers || lora->value.size() != cfg.layers)) {
    fail(Errc::adapter, "adapter covers " + std::to_string(lora->query.size()) +
                            " layers, backbone has " + std::to_string(cfg.layers));
  }
  auto binding = [&](const std::optional<LoraSlot>& slot, std::size_t d_in,
                     std::size_t d_out) -> std::optional<nn::LoraBinding<float>> {
    if (!slot) return std::nullopt;
    if (slot->a->value.cols() != d_in || slot->b->value.rows() != d_out ||
        slot->a->value.rows() != slot->b->value.cols()) {
      fail(Errc::adapter, "adapter matrices A " + slot->a->value.shape_string() + ", B " +
                              slot->b->value.shape_string() + " do not fit a " + std::to_string(d_out) +
                              "x" + std::to_string(d_in) + " projection");
    }
    return nn::LoraBinding<float>{slot->a, slot->b, slot->scale};
  };
  blocks_.reserve(cfg.layers);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    BlockParams& bp = backbone.blocks[l];
    std::optional<nn::LoraBinding<float>> lq, lv;
    if (lora) {
      lq = binding(lora->query[l], cfg.width, cfg.width);
      lv = binding(lora->value[l], cfg.width, cfg.width);
    }
    blocks_.push_back(Block{
        nn::MultiHeadAttention<float>({&bp.wq, &bp.wk, &bp.wv, &bp.wo}, cfg.heads, lq, lv),
        nn::LayerNorm<float>(bp.ln1_gain, bp.ln1_bias),
        nn::FeedForward<float>(bp.w1, bp.w2),
        nn::LayerNorm<float>(bp.ln2_gain, bp.ln2_bias),
    });
  }
}

nn::Matrix ForwardPass::run(std::span<const TokenId> ids) {
  pooled_ = pool_.forward(run_hidden(ids));
  ran_ = true;
  return head_linear_.forward(pooled_);
}

nn::Matrix ForwardPass::run_hidden(std::span<const TokenId> ids) {
  ran_ = false;
  hidden_ran_ = false;
  const BackboneConfig& cfg = backbone_->config();
  std::size_t n = ids.size();
  while (n > 1 && ids[n - 1] == data::kPadId) --n;
  if (n == 0) fail(Errc::input, "empty token sequence");
  if (n > cfg.max_len) {
    fail(Errc::input, "sequence of " + std::to_string(n) + " tokens exceeds max_len " +
                          std::to_string(cfg.max_len));
  }
  const auto seq = ids.first(n);
  std::vector<std::uint8_t> mask(n, 1);
  bool any_pad = false;
  std::vector<std::uint32_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (seq[i] >= cfg.vocab_size) {
      fail(Errc::input, "token id " + std::to_string(seq[i]) + " >= vocab size " +
                            std::to_string(cfg.vocab_size));
    }
    if (seq[i] == data::kPadId) {
      mask[i] = 0;
      any_pad = true;
    }
    pos[i] = static_cast<std::uint32_t>(i);
  }

  nn::Matrix x = tokens_.forward(seq);
  nn::add_inplace(x, positions_.forward(pos));
  const std::span<const std::uint8_t> key_mask =
      any_pad ? std::span<const std::uint8_t>(mask) : std::span<const std::uint8_t>();
  for (auto& blk : blocks_) {
    nn::Matrix h = blk.attn.forward(x, key_mask);
    nn::add_inplace(h, x);
    nn::Matrix h1 = blk.ln1.forward(h);
    nn::Matrix f = blk.ff.forward(h1);
    nn::add_inplace(f, h1);
    x = blk.ln2.forward(f);
  }
  hidden_ran_ = true;
  return x;
}

std::vector<std::vector<nn::Matrix>> ForwardPass::attention_weights() const {
  std::vector<std::vector<nn::Matrix>> out;
  for (const auto& blk : blocks_) out.push_back(blk.attn.weights());
  return out;
}

void ForwardPass::backward(const nn::Matrix& dlogits) {
  if (!ran_) fail(Errc::state, "model backward called before forward");
  backward_hidden(pool_.backward(head_linear_.backward(dlogits)));
}

void ForwardPass::backward_hidden(const nn::Matrix& dhidden) {
  if (!hidden_ran_) fail(Errc::state, "model backward called before forward");
  nn::Matrix dx = dhidden;
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    nn::Matrix df = it->ln2.backward(dx);
    nn::Matrix dh1 = it->ff.backward(df);
    nn::add_inplace(dh1, df);
    nn::Matrix dh = it->ln1.backward(dh1);
    nn::Matrix dxin = it->attn.backward(dh);
    nn::add_inplace(dxin, dh);
    dx = std::move(dxin);
  }
  positions_.backward(dx);
  tokens_.backward(dx);
}

nn::Matrix forward(const Backbone& backbone, const LoraAttachment* lora,
                   const ClassificationHead& head, std::span<const TokenId> ids) {
  ForwardPass pass(const_cast<Backbone&>(backbone), lora, const_cast<ClassificationHead&>(head));
  return pass.run(ids);
}

// ---------------------------------------------------------------- checkpoint

Bytes save_backbone(const Backbone& backbone) {
  const BackboneConfig& c = backbone.config();
  ByteWriter w;
  w.put_magic(kMagic);
  w.put_u16(kVersion);
  w.put_u32(static_cast<std::uint32_t>(c.layers));
  w.put_u32(static_cast<std::uint32_t>(c.width));
  w.put_u32(static_cast<std::uint32_t>(c.heads));
  w.put_u32(static_cast<std::uint32_t>(c.ff_width));
  w.put_u32(static_cast<std::uint32_t>(c.vocab_size));
  w.put_u32(static_cast<std::uint32_t>(c.max_len));
  w.put_u64(c.seed);
  for (const nn::Parameter* p : backbone.parameters()) w.put_f32s(p->value.values());
  w.put_crc();
  return w.take();
}

Backbone load_backbone(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "backbone checkpoint");
  r.expect_magic(kMagic);
  if (r.u16() != kVersion) fail(Errc::format, "backbone checkpoint: unsupported version");
  BackboneConfig c;
  c.layers = r.u32();
  c.width = r.u32();
  c.heads = r.u32();
  c.ff_width = r.u32();
  c.vocab_size = r.u32();
  c.max_len = r.u32();
  c.seed = r.u64();
  try {
    c.validate();
  } catch (const Error& e) {
    fail(Errc::format, std::string("backbone checkpoint: ") + e.what());
  }
  const std::size_t expected = backbone_param_count(c) * 4 + 4;
  if (r.remaining() != expected) fail(Errc::format, "backbone checkpoint: payload size mismatch");
  Backbone bb(c);
  for (nn::Parameter* p : bb.parameters()) r.f32s(p->value.values());
  r.expect_crc();
  for (nn::Parameter* p : bb.parameters())
    if (!nn::all_finite(p->value)) fail(Errc::format, "backbone checkpoint: non-finite weight");
  return bb;
}

std::uint32_t backbone_fingerprint(const Backbone& backbone) {
  // CRC over the checkpoint body. Including the trailing CRC would yield the
  // constant CRC-32 residue for every checkpoint.
  const Bytes bytes = save_backbone(backbone);
  return crc32(std::span<const std::uint8_t>(bytes).first(bytes.size() - 4));
}

}  // namespace lecc::model
