// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/error.hpp"

namespace lecc {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::dimension: return "E_DIMENSION";
    case Errc::state: return "E_STATE";
    case Errc::label: return "E_LABEL";
    case Errc::schema: return "E_SCHEMA";
    case Errc::io: return "E_IO";
    case Errc::count: return "E_COUNT";
    case Errc::schedule: return "E_SCHEDULE";
    case Errc::codec: return "E_CODEC";
    case Errc::config: return "E_CONFIG";
    case Errc::input: return "E_INPUT";
    case Errc::adapter: return "E_ADAPTER";
    case Errc::compatibility: return "E_COMPATIBILITY";
    case Errc::format: return "E_FORMAT";
    case Errc::data: return "E_DATA";
    case Errc::spec: return "E_SPEC";
    case Errc::consistency: return "E_CONSISTENCY";
    case Errc::protocol: return "E_PROTOCOL";
    case Errc::connection: return "E_CONNECTION";
    case Errc::bind: return "E_BIND";
  }
  return "E_UNKNOWN";
}

}  // namespace lecc
