// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lecc {

/// Machine-parsable failure categories. The CLI prints these as
/// `error: <code>: <message>` on a single line.
enum class Errc {
  dimension,
  state,
  label,
  schema,
  io,
  count,
  schedule,
  codec,
  config,
  input,
  adapter,
  compatibility,
  format,
  data,
  spec,
  consistency,
  protocol,
  connection,
  bind,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace lecc
