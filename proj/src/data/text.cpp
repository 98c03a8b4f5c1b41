// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#include "lecc/data/text.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include "lecc/error.hpp"

namespace lecc::data {

namespace {

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') c = '_';
  return s;
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

}  // namespace

std::string bucket_value(const std::string& value) {
  if (value.empty()) return value;
  const bool continuous = value.find_first_of(".eE") != std::string::npos;
  if (!continuous) return value;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size() || errno == ERANGE || !std::isfinite(v)) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string textualize(const FlowRecord& record) {
  std::string out(kClsToken);
  for (const auto& f : record.features) {
    out.push_back(' ');
    out += sanitize(f.name);
    out.push_back(':');
    out += sanitize(bucket_value(f.value));
  }
  return out;
}

TokenVocab::TokenVocab() : TokenVocab(std::vector<std::string>{}) {}

TokenVocab::TokenVocab(std::vector<std::string> tokens_in_id_order) {
  tokens_ = {std::string(kPadToken), std::string(kUnkToken), std::string(kClsToken)};
  std::size_t start = 0;
  if (tokens_in_id_order.size() >= 3 && tokens_in_id_order[0] == kPadToken &&
      tokens_in_id_order[1] == kUnkToken && tokens_in_id_order[2] == kClsToken) {
    start = 3;
  }
  for (std::size_t i = start; i < tokens_in_id_order.size(); ++i) tokens_.push_back(tokens_in_id_order[i]);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      fail(Errc::format, "duplicate vocabulary token " + tokens_[i]);
    }
  }
}

TokenId TokenVocab::id(std::string_view token) const {
  const auto it = ids_.find(token);
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& TokenVocab::token(TokenId id) const {
  if (id >= tokens_.size()) fail(Errc::input, "token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

TokenVocab build_vocab(std::span<const std::string> train_texts) {
  std::set<std::string, std::less<>> seen;
  for (const auto& t : train_texts)
    for (auto tok : split_ws(t))
      if (tok != kPadToken && tok != kUnkToken && tok != kClsToken) seen.emplace(tok);
  return TokenVocab(std::vector<std::string>(seen.begin(), seen.end()));
}

std::vector<TokenId> tokenize(const std::string& text, const TokenVocab& vocab, std::size_t max_len) {
  if (max_len == 0) fail(Errc::config, "max_len must be at least 1");
  std::vector<TokenId> ids;
  ids.reserve(max_len);
  for (auto tok : split_ws(text)) {
    if (ids.size() == max_len) break;
    ids.push_back(vocab.id(tok));
  }
  ids.resize(max_len, kPadId);
  return ids;
}

std::string detokenize(std::span<const TokenId> ids, const TokenVocab& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (id == kPadId) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocab.token(id);
  }
  return out;
}

}  // namespace lecc::data
