// Copyright 2026 The LECC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lecc/data/records.hpp"

namespace lecc::data {

using TokenId = std::uint32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kClsId = 2;
inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "CLS";
inline constexpr std::size_t kDefaultMaxLen = 64;

/// Integers pass through unchanged; decimal or exponent values are rounded
/// to three significant digits. Non-numeric text passes through.
std::string bucket_value(const std::string& value);

/// "CLS name:value name:value ..." in column order. Spaces inside names or
/// values become '_'.
std::string textualize(const FlowRecord& record);

/// Whitespace-token vocabulary. Ids 0..2 are PAD, UNK and CLS; training
/// tokens get ids from 3 upward in lexicographic order.
class TokenVocab {
 public:
  TokenVocab();
  explicit TokenVocab(std::vector<std::string> tokens_in_id_order);

  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  bool operator==(const TokenVocab& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, TokenId, std::less<>> ids_;
};

TokenVocab build_vocab(std::span<const std::string> train_texts);

/// Maps whitespace tokens to ids (unknown → UNK), truncating or right-padding
/// with PAD to exactly max_len ids.
std::vector<TokenId> tokenize(const std::string& text, const TokenVocab& vocab,
                              std::size_t max_len = kDefaultMaxLen);

std::string detokenize(std::span<const TokenId> ids, const TokenVocab& vocab);

}  // namespace lecc::data
