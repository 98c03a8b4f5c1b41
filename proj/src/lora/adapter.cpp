// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/lora/adapter.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "lecc/error.hpp"
#include "lecc/nn/rng.hpp"

namespace lecc::lora {

namespace {

constexpr char kMagic[] = "LADP";
constexpr std::uint16_t kVersion = 1;

std::uint16_t narrow16(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint16_t>::max()) {
    fail(Errc::adapter, std::string(what) + " " + std::to_string(v) + " does not fit the adapter format");
  }
  return static_cast<std::uint16_t>(v);
}

nn::Parameter& target_weight(model::BlockParams& block, Target t) {
  return t == Target::query ? block.wq : block.wv;
}

}  // namespace

void LoraConfig::validate(std::size_t width) const {
  if (rank < 1) fail(Errc::config, "LoRA rank must be at least 1");
  if (rank > width) {
    fail(Errc::config, "LoRA rank " + std::to_string(rank) + " exceeds projection width " +
                           std::to_string(width));
  }
  if (!(alpha > 0.0f)) fail(Errc::config, "LoRA alpha must be positive");
  if (targets.empty()) fail(Errc::config, "LoRA needs at least one target projection");
  std::set<Target> seen(targets.begin(), targets.end());
  if (seen.size() != targets.size()) fail(Errc::config, "duplicate LoRA target");
}

model::LoraAttachment LoraAdapter::attachment(std::size_t layers) const {
  model::LoraAttachment att;
  att.query.resize(layers);
  att.value.resize(layers);
  const float s = config.scale();
  for (const auto& e : entries) {
    if (e.layer >= layers) {
      fail(Errc::adapter, "adapter entry for layer " + std::to_string(e.layer) + " but backbone has " +
                              std::to_string(layers));
    }
    // Forward passes only read through these pointers.
    auto* a = const_cast<nn::Parameter*>(&e.a);
    auto* b = const_cast<nn::Parameter*>(&e.b);
    (e.target == Target::query ? att.query : att.value)[e.layer] = model::LoraSlot{a, b, s};
  }
  return att;
}

std::vector<nn::Parameter*> LoraAdapter::trainable_parameters() {
  std::vector<nn::Parameter*> out;
  for (auto& e : entries) {
    out.push_back(&e.a);
    out.push_back(&e.b);
  }
  out.push_back(&head.weight);
  out.push_back(&head.bias);
  return out;
}

LoraAdapter init_adapter(const LoraConfig& config, const model::Backbone& backbone,
                         std::uint32_t round_id, std::span<const ClassId> classes, std::uint64_t seed) {
  const std::size_t d = backbone.config().width;
  config.validate(d);
  LoraAdapter ad;
  ad.round_id = round_id;
  ad.config = config;
  std::sort(ad.config.targets.begin(), ad.config.targets.end());
  ad.backbone_fingerprint = model::backbone_fingerprint(backbone);
  nn::Rng rng(seed);
  for (std::size_t l = 0; l < backbone.config().layers; ++l) {
    for (Target t : ad.config.targets) {
      LoraEntry e;
      e.layer = static_cast<std::uint16_t>(l);
      e.target = t;
      e.a = nn::Parameter(rng.normal_matrix<float>(config.rank, d, config.init_std));
      e.b = nn::Parameter(nn::Matrix(d, config.rank));
      ad.entries.push_back(std::move(e));
    }
  }
  ad.head = model::attach_head(classes, d, nn::derive_seed(seed, 1));
  return ad;
}

nn::Matrix lora_delta(const nn::Matrix& x, const nn::Matrix& base_weight, const LoraEntry& entry,
                      float scale) {
  if (x.cols() != base_weight.cols() || entry.a.value.cols() != base_weight.cols() ||
      entry.b.value.rows() != base_weight.rows() || entry.b.value.cols() != entry.a.value.rows()) {
    fail(Errc::adapter, "lora shapes do not align: x " + x.shape_string() + ", W " +
                            base_weight.shape_string() + ", A " + entry.a.value.shape_string() + ", B " +
                            entry.b.value.shape_string());
  }
  nn::Matrix out = nn::matmul_nt(x, base_weight);
  nn::Matrix u = nn::matmul_nt(x, entry.a.value);
  nn::add_inplace(out, nn::matmul_nt(u, entry.b.value), scale);
  return out;
}

nn::Matrix dense_delta(const LoraEntry& entry, float scale) {
  nn::Matrix d = nn::matmul(entry.b.value, entry.a.value);
  nn::scale_inplace(d, scale);
  return d;
}

model::Backbone merge(const LoraAdapter& adapter, model::Backbone backbone) {
  if (model::backbone_fingerprint(backbone) != adapter.backbone_fingerprint) {
    fail(Errc::compatibility, "adapter was trained against a different backbone");
  }
  const float s = adapter.config.scale();
  for (const auto& e : adapter.entries) {
    if (e.layer >= backbone.blocks.size()) fail(Errc::adapter, "adapter layer out of range");
    nn::Parameter& w = target_weight(backbone.blocks[e.layer], e.target);
    nn::add_inplace(w.value, dense_delta(e, s));
  }
  return backbone;
}

std::size_t count_params(const LoraAdapter& adapter) {
  std::size_t n = 0;
  for (const auto& e : adapter.entries) n += e.a.count() + e.b.count();
  return n;
}

std::size_t adapter_param_count(const LoraConfig& config, std::size_t layers, std::size_t width) {
  return layers * config.targets.size() * (config.rank * width + width * config.rank);
}

double footprint_ratio(const LoraAdapter& adapter, const model::Backbone& backbone) {
  return static_cast<double>(count_params(adapter)) / static_cast<double>(model::count_params(backbone));
}

std::size_t serialized_size(std::size_t classes, std::size_t rank, std::size_t targets, std::size_t width) {
  const std::size_t header = 4 + 2 + 4 + 2 + 2 * classes + 2 + 4 + 2;
  const std::size_t per_target = 2 + 1 + 2 + 2 + 4 * (rank * width + width * rank);
  const std::size_t head = 2 + 2 + 4 * (classes * width + classes);
  return header + targets * per_target + head + 4 + 4;
}

Bytes serialize(const LoraAdapter& adapter) {
  ByteWriter w;
  w.put_magic(kMagic);
  w.put_u16(kVersion);
  w.put_u32(adapter.round_id);
  w.put_u16(narrow16(adapter.classes().size(), "class count"));
  for (ClassId c : adapter.classes()) w.put_u16(narrow16(c, "class id"));
  w.put_u16(narrow16(adapter.config.rank, "rank"));
  w.put_f32(adapter.config.alpha);
  w.put_u16(narrow16(adapter.entries.size(), "target count"));
  for (const auto& e : adapter.entries) {
    w.put_u16(e.layer);
    w.put_u8(static_cast<std::uint8_t>(e.target));
    w.put_u16(narrow16(e.a.value.cols(), "d_in"));
    w.put_u16(narrow16(e.b.value.rows(), "d_out"));
    w.put_f32s(e.a.value.values());
    w.put_f32s(e.b.value.values());
  }
  w.put_u16(narrow16(adapter.head.weight.value.rows(), "head rows"));
  w.put_u16(narrow16(adapter.head.weight.value.cols(), "head cols"));
  w.put_f32s(adapter.head.weight.value.values());
  w.put_f32s(adapter.head.bias.value.values());
  w.put_u32(adapter.backbone_fingerprint);
  w.put_crc();
  return w.take();
}

LoraAdapter deserialize(std::span<const std::uint8_t> bytes) {
  // The CRC is checked first so that corruption anywhere is reported as such.
  if (bytes.size() < 8) fail(Errc::format, "adapter: truncated");
  {
    ByteReader crc_check(bytes, "adapter");
    crc_check.bytes(bytes.size() - 4);
    crc_check.expect_crc();
  }
  ByteReader r(bytes, "adapter");
  r.expect_magic(kMagic);
  if (r.u16() != kVersion) fail(Errc::format, "adapter: unsupported version");
  LoraAdapter ad;
  ad.round_id = r.u32();
  const std::uint16_t n_classes = r.u16();
  if (n_classes == 0) fail(Errc::format, "adapter: no classes");
  std::vector<ClassId> classes(n_classes);
  for (auto& c : classes) c = r.u16();
  for (std::size_t i = 1; i < classes.size(); ++i)
    if (classes[i] <= classes[i - 1]) fail(Errc::format, "adapter: class ids not strictly increasing");
  ad.config.rank = r.u16();
  ad.config.alpha = r.f32();
  if (ad.config.rank == 0 || !(ad.config.alpha > 0.0f)) fail(Errc::format, "adapter: invalid rank or alpha");
  const std::uint16_t n_targets = r.u16();
  std::set<Target> targets;
  for (std::uint16_t t = 0; t < n_targets; ++t) {
    LoraEntry e;
    e.layer = r.u16();
    const std::uint8_t tag = r.u8();
    if (tag > 1) fail(Errc::format, "adapter: unknown target tag");
    e.target = static_cast<Target>(tag);
    const std::size_t d_in = r.u16(), d_out = r.u16();
    e.a = nn::Parameter(nn::Matrix(ad.config.rank, d_in));
    e.b = nn::Parameter(nn::Matrix(d_out, ad.config.rank));
    r.f32s(e.a.value.values());
    r.f32s(e.b.value.values());
    targets.insert(e.target);
    ad.entries.push_back(std::move(e));
  }
  ad.config.targets.assign(targets.begin(), targets.end());
  const std::size_t rows = r.u16(), cols = r.u16();
  if (rows != n_classes) fail(Errc::format, "adapter: head rows do not match class count");
  ad.head.classes = std::move(classes);
  ad.head.weight = nn::Parameter(nn::Matrix(rows, cols));
  ad.head.bias = nn::Parameter(nn::Matrix(1, rows));
  r.f32s(ad.head.weight.value.values());
  r.f32s(ad.head.bias.value.values());
  ad.backbone_fingerprint = r.u32();
  if (r.remaining() != 4) fail(Errc::format, "adapter: trailing bytes");
  return ad;
}

bool has_valid_crc(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) return false;
  ByteReader r(bytes.last(4), "adapter");
  return r.u32() == crc32(bytes.first(bytes.size() - 4));
}

std::size_t encoded_length(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "adapter");
  r.expect_magic(kMagic);
  r.u16();
  r.u32();
  const std::size_t n_classes = r.u16();
  r.bytes(2 * n_classes);
  const std::size_t rank = r.u16();
  r.f32();
  const std::size_t n_targets = r.u16();
  for (std::size_t t = 0; t < n_targets; ++t) {
    r.u16();
    r.u8();
    const std::size_t d_in = r.u16(), d_out = r.u16();
    r.bytes(4 * (rank * d_in + d_out * rank));
  }
  const std::size_t rows = r.u16(), cols = r.u16();
  r.bytes(4 * (rows * cols + rows));
  r.u32();
  r.u32();
  return r.position();
}

Bytes encode_bundle(const AdapterBundle& bundle) {
  ByteWriter w;
  w.put_u16(narrow16(bundle.size(), "bundle size"));
  for (const auto& a : bundle.adapters) w.put_bytes(serialize(a));
  return w.take();
}

AdapterBundle decode_bundle(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "bundle");
  const std::size_t n = r.u16();
  AdapterBundle bundle;
  std::size_t pos = r.position();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = encoded_length(bytes.subspan(pos));
    bundle.add(deserialize(bytes.subspan(pos, len)));
    pos += len;
  }
  if (pos != bytes.size()) fail(Errc::format, "bundle: trailing bytes");
  return bundle;
}

void AdapterBundle::add(LoraAdapter adapter) {
  if (adapters.empty() && backbone_fingerprint == 0) backbone_fingerprint = adapter.backbone_fingerprint;
  if (adapter.backbone_fingerprint != backbone_fingerprint) {
    fail(Errc::compatibility, "adapter fingerprint does not match the bundle's backbone");
  }
  auto pos = std::upper_bound(adapters.begin(), adapters.end(), adapter.round_id,
                              [](std::uint32_t r, const LoraAdapter& a) { return r < a.round_id; });
  for (auto it = adapters.begin(); it != adapters.end(); ++it) {
    if (it->round_id != adapter.round_id) continue;
    std::vector<ClassId> common;
    std::set_intersection(it->classes().begin(), it->classes().end(), adapter.classes().begin(),
                          adapter.classes().end(), std::back_inserter(common));
    if (!common.empty()) {
      fail(Errc::adapter, "round " + std::to_string(adapter.round_id) +
                              " already holds an adapter covering class " + std::to_string(common.front()));
    }
  }
  adapters.insert(pos, std::move(adapter));
}

std::vector<ClassId> AdapterBundle::known_classes() const {
  std::set<ClassId> all;
  for (const auto& a : adapters) all.insert(a.classes().begin(), a.classes().end());
  return {all.begin(), all.end()};
}

void validate_bundle(const AdapterBundle& bundle) {
  AdapterBundle copy;
  copy.backbone_fingerprint = bundle.backbone_fingerprint;
  for (std::size_t i = 0; i < bundle.adapters.size(); ++i) {
    if (i > 0 && bundle.adapters[i].round_id < bundle.adapters[i - 1].round_id) {
      fail(Errc::adapter, "bundle adapters are not in round order");
    }
    LoraAdapter shallow;
    shallow.round_id = bundle.adapters[i].round_id;
    shallow.head.classes = bundle.adapters[i].classes();
    shallow.backbone_fingerprint = bundle.adapters[i].backbone_fingerprint;
    copy.add(std::move(shallow));
  }
}

}  // namespace lecc::lora
