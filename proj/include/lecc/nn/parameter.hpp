// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>

#include "lecc/nn/matrix.hpp"

namespace lecc::nn {

/// A weight tensor with its gradient buffer. Frozen parameters never receive
/// gradient writes and are skipped by the optimizer.
template <typename T>
struct BasicParameter {
  BasicMatrix<T> value;
  BasicMatrix<T> grad;
  bool trainable = true;

  BasicParameter() = default;
  explicit BasicParameter(BasicMatrix<T> v, bool is_trainable = true)
      : value(std::move(v)), grad(value.rows(), value.cols()), trainable(is_trainable) {}

  void zero_grad() { grad.fill(T{0}); }
  std::size_t count() const noexcept { return value.size(); }
};

using Parameter = BasicParameter<float>;
using ParameterD = BasicParameter<double>;

}  // namespace lecc::nn
