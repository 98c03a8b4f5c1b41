// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lecc/error.hpp"

namespace lecc::nn {

namespace {

[[noreturn]] void no_forward(const char* layer) {
  fail(Errc::state, std::string(layer) + ": backward called without a cached forward pass");
}

template <typename T>
void accumulate_rows(BasicMatrix<T>& grad, const BasicMatrix<T>& dy) {
  for (std::size_t i = 0; i < dy.rows(); ++i) {
    auto r = dy.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) grad(0, j) += r[j];
  }
}

}  // namespace

// ---------------------------------------------------------------- Linear

template <typename T>
Linear<T>::Linear(BasicParameter<T>& weight, BasicParameter<T>* bias)
    : weight_(&weight), bias_(bias) {
  if (bias_ && (bias_->value.rows() != 1 || bias_->value.cols() != weight.value.rows())) {
    fail(Errc::dimension, "linear bias " + bias_->value.shape_string() +
                              " does not match weight " + weight.value.shape_string());
  }
}

template <typename T>
BasicMatrix<T> Linear<T>::forward(const BasicMatrix<T>& x) {
  BasicMatrix<T> y = matmul_nt(x, weight_->value);
  if (bias_) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
      auto r = y.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias_->value(0, j);
    }
  }
  x_ = x;
  return y;
}

template <typename T>
BasicMatrix<T> Linear<T>::backward(const BasicMatrix<T>& dy) {
  if (!x_) no_forward("linear");
  if (weight_->trainable) matmul_tn_acc(dy, *x_, weight_->grad);
  if (bias_ && bias_->trainable) accumulate_rows(bias_->grad, dy);
  return matmul(dy, weight_->value);
}

// ---------------------------------------------------------------- LoraBranch

template <typename T>
LoraBranch<T>::LoraBranch(BasicParameter<T>& a, BasicParameter<T>& b, T scale)
    : a_(&a), b_(&b), scale_(scale) {
  if (b.value.cols() != a.value.rows()) {
    fail(Errc::adapter, "lora rank mismatch: A " + a.value.shape_string() + ", B " +
                            b.value.shape_string());
  }
}

template <typename T>
BasicMatrix<T> LoraBranch<T>::forward(const BasicMatrix<T>& x) {
  if (x.cols() != a_->value.cols()) {
    fail(Errc::adapter, "lora input " + x.shape_string() + " does not match A " +
                            a_->value.shape_string());
  }
  BasicMatrix<T> u = matmul_nt(x, a_->value);
  BasicMatrix<T> y = matmul_nt(u, b_->value);
  scale_inplace(y, scale_);
  x_ = x;
  u_ = std::move(u);
  return y;
}

template <typename T>
BasicMatrix<T> LoraBranch<T>::backward(const BasicMatrix<T>& dy) {
  if (!x_ || !u_) no_forward("lora");
  if (b_->trainable) matmul_tn_acc(dy, *u_, b_->grad, scale_);
  BasicMatrix<T> du = matmul(dy, b_->value);
  scale_inplace(du, scale_);
  if (a_->trainable) matmul_tn_acc(du, *x_, a_->grad);
  return matmul(du, a_->value);
}

// ---------------------------------------------------------------- Attention

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(AttentionParams<T> params, std::size_t heads,
                                          std::optional<LoraBinding<T>> lora_q,
                                          std::optional<LoraBinding<T>> lora_v)
    : params_(params),
      heads_(heads),
      q_(*params.wq),
      k_(*params.wk),
      v_(*params.wv),
      o_(*params.wo) {
  const std::size_t d = params.wq->value.rows();
  if (heads_ == 0 || d % heads_ != 0) {
    fail(Errc::config, "attention width " + std::to_string(d) + " not divisible by " +
                           std::to_string(heads_) + " heads");
  }
  if (lora_q) lora_q_.emplace(*lora_q->a, *lora_q->b, lora_q->scale);
  if (lora_v) lora_v_.emplace(*lora_v->a, *lora_v->b, lora_v->scale);
}

template <typename T>
BasicMatrix<T> MultiHeadAttention<T>::forward(const BasicMatrix<T>& x,
                                              std::span<const std::uint8_t> key_mask) {
  const std::size_t n = x.rows();
  const std::size_t d = params_.wq->value.rows();
  const std::size_t dh = d / heads_;
  if (!key_mask.empty() && key_mask.size() != n) {
    fail(Errc::dimension, "attention key mask length " + std::to_string(key_mask.size()) +
                              " does not match sequence length " + std::to_string(n));
  }

  q_act_ = q_.forward(x);
  if (lora_q_) add_inplace(q_act_, lora_q_->forward(x));
  k_act_ = k_.forward(x);
  v_act_ = v_.forward(x);
  if (lora_v_) add_inplace(v_act_, lora_v_->forward(x));

  const T inv_sqrt = T{1} / std::sqrt(static_cast<T>(dh));
  BasicMatrix<T> ctx(n, d);
  probs_.assign(heads_, BasicMatrix<T>(n, n));
  for (std::size_t h = 0; h < heads_; ++h) {
    const std::size_t off = h * dh;
    BasicMatrix<T>& p = probs_[h];
    for (std::size_t i = 0; i < n; ++i) {
      const T* qi = &q_act_(i, off);
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (!key_mask.empty() && !key_mask[j]) continue;
        const T* kj = &k_act_(j, off);
        T s = T{0};
        for (std::size_t c = 0; c < dh; ++c) s += qi[c] * kj[c];
        s *= inv_sqrt;
        p(i, j) = s;
        mx = std::max(mx, s);
      }
      T sum = T{0};
      for (std::size_t j = 0; j < n; ++j) {
        if (!key_mask.empty() && !key_mask[j]) {
          p(i, j) = T{0};
          continue;
        }
        p(i, j) = std::exp(p(i, j) - mx);
        sum += p(i, j);
      }
      if (sum > T{0})
        for (std::size_t j = 0; j < n; ++j) p(i, j) /= sum;
      T* ci = &ctx(i, off);
      for (std::size_t j = 0; j < n; ++j) {
        const T pij = p(i, j);
        if (pij == T{0}) continue;
        const T* vj = &v_act_(j, off);
        for (std::size_t c = 0; c < dh; ++c) ci[c] += pij * vj[c];
      }
    }
  }
  has_forward_ = true;
  return o_.forward(ctx);
}

template <typename T>
BasicMatrix<T> MultiHeadAttention<T>::backward(const BasicMatrix<T>& dy) {
  if (!has_forward_) no_forward("attention");
  const std::size_t n = q_act_.rows();
  const std::size_t d = q_act_.cols();
  const std::size_t dh = d / heads_;
  const T inv_sqrt = T{1} / std::sqrt(static_cast<T>(dh));

  BasicMatrix<T> dctx = o_.backward(dy);
  BasicMatrix<T> dq(n, d), dk(n, d), dv(n, d);
  std::vector<T> dp(n);
  for (std::size_t h = 0; h < heads_; ++h) {
    const std::size_t off = h * dh;
    const BasicMatrix<T>& p = probs_[h];
    for (std::size_t i = 0; i < n; ++i) {
      const T* dci = &dctx(i, off);
      T dot = T{0};
      for (std::size_t j = 0; j < n; ++j) {
        const T* vj = &v_act_(j, off);
        T s = T{0};
        for (std::size_t c = 0; c < dh; ++c) s += dci[c] * vj[c];
        dp[j] = s;
        dot += p(i, j) * s;
        const T pij = p(i, j);
        if (pij != T{0}) {
          T* dvj = &dv(j, off);
          for (std::size_t c = 0; c < dh; ++c) dvj[c] += pij * dci[c];
        }
      }
      const T* qi = &q_act_(i, off);
      T* dqi = &dq(i, off);
      for (std::size_t j = 0; j < n; ++j) {
        const T ds = p(i, j) * (dp[j] - dot) * inv_sqrt;
        if (ds == T{0}) continue;
        const T* kj = &k_act_(j, off);
        T* dkj = &dk(j, off);
        for (std::size_t c = 0; c < dh; ++c) {
          dqi[c] += ds * kj[c];
          dkj[c] += ds * qi[c];
        }
      }
    }
  }

  BasicMatrix<T> dx = q_.backward(dq);
  if (lora_q_) add_inplace(dx, lora_q_->backward(dq));
  add_inplace(dx, k_.backward(dk));
  add_inplace(dx, v_.backward(dv));
  if (lora_v_) add_inplace(dx, lora_v_->backward(dv));
  return dx;
}

// ---------------------------------------------------------------- FeedForward

template <typename T>
T gelu(T x) {
  return T{0.5} * x * (T{1} + std::erf(x / std::numbers::sqrt2_v<T>));
}

template <typename T>
T gelu_grad(T x) {
  const T cdf = T{0.5} * (T{1} + std::erf(x / std::numbers::sqrt2_v<T>));
  const T pdf = std::exp(T{-0.5} * x * x) / std::sqrt(T{2} * std::numbers::pi_v<T>);
  return cdf + x * pdf;
}

template <typename T>
FeedForward<T>::FeedForward(BasicParameter<T>& w1, BasicParameter<T>& w2) : up_(w1), down_(w2) {
  if (w1.value.rows() != w2.value.cols() || w1.value.cols() != w2.value.rows()) {
    fail(Errc::dimension, "feed-forward weights " + w1.value.shape_string() + " and " +
                              w2.value.shape_string() + " do not chain");
  }
}

template <typename T>
BasicMatrix<T> FeedForward<T>::forward(const BasicMatrix<T>& x) {
  BasicMatrix<T> pre = up_.forward(x);
  BasicMatrix<T> act(pre.rows(), pre.cols());
  for (std::size_t i = 0; i < pre.size(); ++i) act.values()[i] = gelu(pre.values()[i]);
  pre_ = std::move(pre);
  return down_.forward(act);
}

template <typename T>
BasicMatrix<T> FeedForward<T>::backward(const BasicMatrix<T>& dy) {
  if (!pre_) no_forward("feed-forward");
  BasicMatrix<T> dact = down_.backward(dy);
  for (std::size_t i = 0; i < dact.size(); ++i) dact.values()[i] *= gelu_grad(pre_->values()[i]);
  return up_.backward(dact);
}

// ---------------------------------------------------------------- LayerNorm

template <typename T>
LayerNorm<T>::LayerNorm(BasicParameter<T>& gain, BasicParameter<T>& bias)
    : gain_(&gain), bias_(&bias) {
  if (gain.value.rows() != 1 || !gain.value.same_shape(bias.value)) {
    fail(Errc::dimension, "layer-norm gain " + gain.value.shape_string() + " and bias " +
                              bias.value.shape_string() + " must be matching rows");
  }
}

template <typename T>
BasicMatrix<T> LayerNorm<T>::forward(const BasicMatrix<T>& x) {
  const std::size_t d = x.cols();
  if (d != gain_->value.cols()) {
    fail(Errc::dimension, "layer-norm input " + x.shape_string() + " vs gain " +
                              gain_->value.shape_string());
  }
  BasicMatrix<T> xhat(x.rows(), d);
  BasicMatrix<T> y(x.rows(), d);
  inv_std_.assign(x.rows(), T{0});
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    T mean = T{0};
    for (T v : r) mean += v;
    mean /= static_cast<T>(d);
    T var = T{0};
    for (T v : r) var += (v - mean) * (v - mean);
    var /= static_cast<T>(d);
    const T inv = T{1} / std::sqrt(var + static_cast<T>(kEpsilon));
    inv_std_[i] = inv;
    for (std::size_t j = 0; j < d; ++j) {
      xhat(i, j) = (r[j] - mean) * inv;
      y(i, j) = xhat(i, j) * gain_->value(0, j) + bias_->value(0, j);
    }
  }
  xhat_ = std::move(xhat);
  return y;
}

template <typename T>
BasicMatrix<T> LayerNorm<T>::backward(const BasicMatrix<T>& dy) {
  if (!xhat_) no_forward("layer-norm");
  const BasicMatrix<T>& xhat = *xhat_;
  const std::size_t d = xhat.cols();
  BasicMatrix<T> dx(dy.rows(), d);
  std::vector<T> dxhat(d);
  for (std::size_t i = 0; i < dy.rows(); ++i) {
    T mean_dxhat = T{0}, mean_dxhat_xhat = T{0};
    for (std::size_t j = 0; j < d; ++j) {
      dxhat[j] = dy(i, j) * gain_->value(0, j);
      mean_dxhat += dxhat[j];
      mean_dxhat_xhat += dxhat[j] * xhat(i, j);
      if (gain_->trainable) gain_->grad(0, j) += dy(i, j) * xhat(i, j);
      if (bias_->trainable) bias_->grad(0, j) += dy(i, j);
    }
    mean_dxhat /= static_cast<T>(d);
    mean_dxhat_xhat /= static_cast<T>(d);
    for (std::size_t j = 0; j < d; ++j) {
      dx(i, j) = inv_std_[i] * (dxhat[j] - mean_dxhat - xhat(i, j) * mean_dxhat_xhat);
    }
  }
  return dx;
}

// ---------------------------------------------------------------- Embedding

template <typename T>
Embedding<T>::Embedding(BasicParameter<T>& table) : table_(&table) {}

template <typename T>
BasicMatrix<T> Embedding<T>::forward(std::span<const std::uint32_t> ids) {
  const std::size_t d = table_->value.cols();
  BasicMatrix<T> out(ids.size(), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table_->value.rows()) {
      fail(Errc::input, "token id " + std::to_string(ids[i]) + " out of range for table of " +
                            std::to_string(table_->value.rows()) + " rows");
    }
    auto src = table_->value.row(ids[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  ids_.emplace(ids.begin(), ids.end());
  return out;
}

template <typename T>
void Embedding<T>::backward(const BasicMatrix<T>& dy) {
  if (!ids_) no_forward("embedding");
  if (!table_->trainable) return;
  for (std::size_t i = 0; i < ids_->size(); ++i) {
    auto g = table_->grad.row((*ids_)[i]);
    auto r = dy.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) g[j] += r[j];
  }
}

// ---------------------------------------------------------------- ClsPool

template <typename T>
BasicMatrix<T> ClsPool<T>::forward(const BasicMatrix<T>& x) {
  if (x.rows() == 0) fail(Errc::input, "cannot pool an empty sequence");
  BasicMatrix<T> out(1, x.cols());
  std::copy(x.row(0).begin(), x.row(0).end(), out.row(0).begin());
  rows_ = x.rows();
  return out;
}

template <typename T>
BasicMatrix<T> ClsPool<T>::backward(const BasicMatrix<T>& dy) {
  if (!rows_) no_forward("cls-pool");
  BasicMatrix<T> dx(*rows_, dy.cols());
  std::copy(dy.row(0).begin(), dy.row(0).end(), dx.row(0).begin());
  return dx;
}

// ---------------------------------------------------------------- Loss

template <typename T>
LossResult<T> cross_entropy(const BasicMatrix<T>& logits, std::span<const std::uint32_t> targets) {
  if (targets.size() != logits.rows()) {
    fail(Errc::label, "cross-entropy: " + std::to_string(targets.size()) + " targets for " +
                          std::to_string(logits.rows()) + " rows");
  }
  const std::size_t n = logits.rows();
  LossResult<T> out{T{0}, BasicMatrix<T>(n, logits.cols())};
  if (n == 0) return out;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] >= logits.cols()) {
      fail(Errc::label, "cross-entropy: target " + std::to_string(targets[i]) +
                            " out of range for " + std::to_string(logits.cols()) + " classes");
    }
    auto r = logits.row(i);
    const T mx = *std::max_element(r.begin(), r.end());
    T sum = T{0};
    for (T v : r) sum += std::exp(v - mx);
    const T lse = mx + std::log(sum);
    out.loss += lse - r[targets[i]];
    for (std::size_t j = 0; j < r.size(); ++j) {
      const T p = std::exp(r[j] - lse);
      out.grad(i, j) = (p - (j == targets[i] ? T{1} : T{0})) / static_cast<T>(n);
    }
  }
  out.loss /= static_cast<T>(n);
  return out;
}

#define LECC_INSTANTIATE(T)                                                          \
  template class Linear<T>;                                                          \
  template class LoraBranch<T>;                                                      \
  template class MultiHeadAttention<T>;                                              \
  template class FeedForward<T>;                                                     \
  template class LayerNorm<T>;                                                       \
  template class Embedding<T>;                                                       \
  template class ClsPool<T>;                                                         \
  template T gelu<T>(T);                                                             \
  template T gelu_grad<T>(T);                                                        \
  template LossResult<T> cross_entropy<T>(const BasicMatrix<T>&, std::span<const std::uint32_t>);

LECC_INSTANTIATE(float)
LECC_INSTANTIATE(double)

#undef LECC_INSTANTIATE

}  // namespace lecc::nn
