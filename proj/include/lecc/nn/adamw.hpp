// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lecc/nn/parameter.hpp"

namespace lecc::nn {

struct AdamWOptions {
  double learning_rate = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

/// AdamW with bias-corrected moments and decoupled weight decay. Moment
/// buffers are bound to the parameter list given at construction; frozen
/// parameters in that list are left untouched.
class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, AdamWOptions options = {});

  void step();
  void zero_grad();

  std::uint64_t step_count() const noexcept { return step_; }
  const AdamWOptions& options() const noexcept { return options_; }
  const Matrix& first_moment(std::size_t i) const { return m_.at(i); }
  const Matrix& second_moment(std::size_t i) const { return v_.at(i); }

 private:
  std::vector<Parameter*> params_;
  AdamWOptions options_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::uint64_t step_ = 0;
};

}  // namespace lecc::nn
