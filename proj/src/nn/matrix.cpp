// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/nn/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "lecc/error.hpp"

namespace lecc::nn {

namespace {

template <typename T>
[[noreturn]] void shape_error(const char* op, const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  fail(Errc::dimension,
       std::string(op) + ": incompatible shapes " + a.shape_string() + " and " + b.shape_string());
}

}  // namespace

template <typename T>
BasicMatrix<T>::BasicMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    fail(Errc::dimension, "matrix data length " + std::to_string(data_.size()) +
                              " does not match shape " + shape_string());
  }
}

template <typename T>
BasicMatrix<T>::BasicMatrix(std::initializer_list<std::initializer_list<T>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) fail(Errc::dimension, "ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

template <typename T>
void BasicMatrix<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
std::string BasicMatrix<T>::shape_string() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

template <typename T>
BasicMatrix<T> identity(std::size_t n) {
  BasicMatrix<T> m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
  return m;
}

template <typename T>
BasicMatrix<T> matmul(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  BasicMatrix<T> c(n, p);
  const T* __restrict ad = a.values().data();
  const T* __restrict bd = b.values().data();
  T* __restrict cd = c.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    T* __restrict crow = cd + i * p;
    for (std::size_t k = 0; k < m; ++k) {
      const T aik = ad[i * m + k];
      const T* __restrict brow = bd + k * p;
      for (std::size_t j = 0; j < p; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

template <typename T>
BasicMatrix<T> matmul_nt(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (a.cols() != b.cols()) shape_error("matmul_nt", a, b);
  return matmul(a, transpose(b));
}

template <typename T>
void matmul_tn_acc(const BasicMatrix<T>& a, const BasicMatrix<T>& b, BasicMatrix<T>& c, T scale) {
  if (a.rows() != b.rows()) shape_error("matmul_tn", a, b);
  if (c.rows() != a.cols() || c.cols() != b.cols()) shape_error("matmul_tn_acc", c, a);
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  const T* __restrict ad = a.values().data();
  const T* __restrict bd = b.values().data();
  T* __restrict cd = c.values().data();
  for (std::size_t k = 0; k < n; ++k) {
    const T* __restrict brow = bd + k * p;
    for (std::size_t i = 0; i < m; ++i) {
      const T aki = ad[k * m + i] * scale;
      if (aki == T{0}) continue;
      T* __restrict crow = cd + i * p;
      for (std::size_t j = 0; j < p; ++j) crow[j] += aki * brow[j];
    }
  }
}

template <typename T>
BasicMatrix<T> matmul_tn(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  BasicMatrix<T> c(a.cols(), b.cols());
  matmul_tn_acc(a, b, c);
  return c;
}

template <typename T>
BasicMatrix<T> transpose(const BasicMatrix<T>& a) {
  BasicMatrix<T> t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

template <typename T>
void add_inplace(BasicMatrix<T>& dst, const BasicMatrix<T>& src, T scale) {
  if (!dst.same_shape(src)) shape_error("add", dst, src);
  auto d = dst.values();
  auto s = src.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
}

template <typename T>
BasicMatrix<T> add(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  BasicMatrix<T> out = a;
  add_inplace(out, b);
  return out;
}

template <typename T>
void scale_inplace(BasicMatrix<T>& m, T s) {
  for (auto& v : m.values()) v *= s;
}

template <typename T>
BasicMatrix<T> softmax_rows(const BasicMatrix<T>& x) {
  BasicMatrix<T> out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto in = x.row(i);
    auto o = out.row(i);
    if (in.empty()) continue;
    const T mx = *std::max_element(in.begin(), in.end());
    T sum = T{0};
    for (std::size_t j = 0; j < in.size(); ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (auto& v : o) v /= sum;
  }
  return out;
}

template <typename T>
bool all_finite(const BasicMatrix<T>& m) noexcept {
  for (T v : m.values())
    if (!std::isfinite(v)) return false;
  return true;
}

template <typename T>
T max_abs_diff(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  if (!a.same_shape(b)) shape_error("max_abs_diff", a, b);
  T best = T{0};
  for (std::size_t i = 0; i < a.size(); ++i)
    best = std::max(best, std::abs(a.values()[i] - b.values()[i]));
  return best;
}

#define LECC_INSTANTIATE(T)                                                                  \
  template class BasicMatrix<T>;                                                             \
  template BasicMatrix<T> identity<T>(std::size_t);                                          \
  template BasicMatrix<T> matmul<T>(const BasicMatrix<T>&, const BasicMatrix<T>&);           \
  template BasicMatrix<T> matmul_nt<T>(const BasicMatrix<T>&, const BasicMatrix<T>&);        \
  template BasicMatrix<T> matmul_tn<T>(const BasicMatrix<T>&, const BasicMatrix<T>&);        \
  template void matmul_tn_acc<T>(const BasicMatrix<T>&, const BasicMatrix<T>&, BasicMatrix<T>&, T); \
  template BasicMatrix<T> transpose<T>(const BasicMatrix<T>&);                               \
  template void add_inplace<T>(BasicMatrix<T>&, const BasicMatrix<T>&, T);                   \
  template BasicMatrix<T> add<T>(const BasicMatrix<T>&, const BasicMatrix<T>&);              \
  template void scale_inplace<T>(BasicMatrix<T>&, T);                                        \
  template BasicMatrix<T> softmax_rows<T>(const BasicMatrix<T>&);                            \
  template bool all_finite<T>(const BasicMatrix<T>&) noexcept;                               \
  template T max_abs_diff<T>(const BasicMatrix<T>&, const BasicMatrix<T>&);

LECC_INSTANTIATE(float)
LECC_INSTANTIATE(double)

#undef LECC_INSTANTIATE

}  // namespace lecc::nn
