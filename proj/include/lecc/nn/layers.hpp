// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lecc/nn/matrix.hpp"
#include "lecc/nn/parameter.hpp"

// Layer objects bind to parameters owned elsewhere (backbone, adapter, head)
// and cache the activations of their last forward call. Calling backward()
// without a preceding forward() is a state error. Backward passes accumulate
// into BasicParameter::grad for trainable parameters only.

namespace lecc::nn {

/// y = x·Wᵀ (+ b). W is stored out×in, b is 1×out.
template <typename T>
class Linear {
 public:
  explicit Linear(BasicParameter<T>& weight, BasicParameter<T>* bias = nullptr);

  BasicMatrix<T> forward(const BasicMatrix<T>& x);
  BasicMatrix<T> backward(const BasicMatrix<T>& dy);

 private:
  BasicParameter<T>* weight_;
  BasicParameter<T>* bias_;
  std::optional<BasicMatrix<T>> x_;
};

/// Low-rank branch: delta = scale · (x·Aᵀ)·Bᵀ with A r×in, B out×r. The dense
/// product B·A is never formed.
template <typename T>
class LoraBranch {
 public:
  LoraBranch(BasicParameter<T>& a, BasicParameter<T>& b, T scale);

  BasicMatrix<T> forward(const BasicMatrix<T>& x);
  BasicMatrix<T> backward(const BasicMatrix<T>& dy);

 private:
  BasicParameter<T>* a_;
  BasicParameter<T>* b_;
  T scale_;
  std::optional<BasicMatrix<T>> x_;
  std::optional<BasicMatrix<T>> u_;
};

template <typename T>
struct LoraBinding {
  BasicParameter<T>* a = nullptr;
  BasicParameter<T>* b = nullptr;
  T scale = T{1};
};

template <typename T>
struct AttentionParams {
  BasicParameter<T>* wq = nullptr;
  BasicParameter<T>* wk = nullptr;
  BasicParameter<T>* wv = nullptr;
  BasicParameter<T>* wo = nullptr;
};

/// Multi-head self-attention. `key_mask[j] == false` excludes position j from
/// every query's attention (PAD positions).
template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention(AttentionParams<T> params, std::size_t heads,
                     std::optional<LoraBinding<T>> lora_q = std::nullopt,
                     std::optional<LoraBinding<T>> lora_v = std::nullopt);

  BasicMatrix<T> forward(const BasicMatrix<T>& x, std::span<const std::uint8_t> key_mask = {});
  BasicMatrix<T> backward(const BasicMatrix<T>& dy);

  /// Attention weights of the last forward, one n×n matrix per head.
  const std::vector<BasicMatrix<T>>& weights() const noexcept { return probs_; }

 private:
  AttentionParams<T> params_;
  std::size_t heads_;
  Linear<T> q_, k_, v_, o_;
  std::optional<LoraBranch<T>> lora_q_, lora_v_;
  bool has_forward_ = false;
  BasicMatrix<T> q_act_, k_act_, v_act_;
  std::vector<BasicMatrix<T>> probs_;
};

template <typename T>
T gelu(T x);
template <typename T>
T gelu_grad(T x);

/// y = GELU(x·W1ᵀ)·W2ᵀ with W1 f×d and W2 d×f.
template <typename T>
class FeedForward {
 public:
  FeedForward(BasicParameter<T>& w1, BasicParameter<T>& w2);

  BasicMatrix<T> forward(const BasicMatrix<T>& x);
  BasicMatrix<T> backward(const BasicMatrix<T>& dy);

 private:
  Linear<T> up_, down_;
  std::optional<BasicMatrix<T>> pre_;
};

/// Per-row normalization with epsilon 1e-5 inside the square root; a
/// constant row normalizes to zero before the affine step.
template <typename T>
class LayerNorm {
 public:
  static constexpr double kEpsilon = 1e-5;

  LayerNorm(BasicParameter<T>& gain, BasicParameter<T>& bias);

  BasicMatrix<T> forward(const BasicMatrix<T>& x);
  BasicMatrix<T> backward(const BasicMatrix<T>& dy);

 private:
  BasicParameter<T>* gain_;
  BasicParameter<T>* bias_;
  std::optional<BasicMatrix<T>> xhat_;
  std::vector<T> inv_std_;
};

template <typename T>
class Embedding {
 public:
  explicit Embedding(BasicParameter<T>& table);

  BasicMatrix<T> forward(std::span<const std::uint32_t> ids);
  /// Accumulates into the table gradient; there is no input gradient.
  void backward(const BasicMatrix<T>& dy);

 private:
  BasicParameter<T>* table_;
  std::optional<std::vector<std::uint32_t>> ids_;
};

/// Selects the first (CLS) row.
template <typename T>
class ClsPool {
 public:
  BasicMatrix<T> forward(const BasicMatrix<T>& x);
  BasicMatrix<T> backward(const BasicMatrix<T>& dy);

 private:
  std::optional<std::size_t> rows_;
};

template <typename T>
struct LossResult {
  T loss;
  BasicMatrix<T> grad;
};

/// Mean negative log-likelihood of log-softmax(logits) at the targets.
/// grad = (softmax − one-hot) / rows.
template <typename T>
LossResult<T> cross_entropy(const BasicMatrix<T>& logits, std::span<const std::uint32_t> targets);

}  // namespace lecc::nn
