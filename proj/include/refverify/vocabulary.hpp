// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "refverify/tokenspace.hpp"

namespace refverify {

/// Whitespace word <-> id mapping. Ids are assigned in first-seen order.
class Vocabulary {
 public:
  Token add(std::string_view word);
  std::optional<Token> find(std::string_view word) const;
  const std::string& word(Token id) const;
  std::size_t size() const { return words_.size(); }

  // Splits on whitespace; unknown words are added.
  TokenSeq encode_adding(std::string_view text);
  // Splits on whitespace; unknown words raise kInvalidToken.
  TokenSeq encode(std::string_view text) const;
  std::string decode(std::span<const Token> tokens) const;

 private:
  std::unordered_map<std::string, Token> ids_;
  std::vector<std::string> words_;
};

std::vector<std::string> split_whitespace(std::string_view text);

// Documents are newline-separated; blank lines are skipped.
std::vector<std::string> read_lines(const std::string& path);

// Integer-token mode: every whitespace-separated field must be an integer in
// [0, vocab_size).
TokenSeq parse_raw_tokens(std::string_view text, std::size_t vocab_size);

}  // namespace refverify
