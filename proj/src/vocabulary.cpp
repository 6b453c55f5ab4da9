// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include "refverify/vocabulary.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

namespace refverify {

Token Vocabulary::add(std::string_view word) {
  if (auto id = find(word)) return *id;
  const auto id = static_cast<Token>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(words_.back(), id);
  return id;
}

std::optional<Token> Vocabulary::find(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::word(Token id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw Error(ErrorKind::kInvalidToken, "unknown token id");
  }
  return words_[static_cast<std::size_t>(id)];
}

TokenSeq Vocabulary::encode_adding(std::string_view text) {
  TokenSeq out;
  for (const auto& w : split_whitespace(text)) out.push_back(add(w));
  return out;
}

TokenSeq Vocabulary::encode(std::string_view text) const {
  TokenSeq out;
  for (const auto& w : split_whitespace(text)) {
    auto id = find(w);
    if (!id) throw Error(ErrorKind::kInvalidToken, "unknown word '" + w + "'");
    out.push_back(*id);
  }
  return out;
}

std::string Vocabulary::decode(std::span<const Token> tokens) const {
  std::string out;
  for (Token t : tokens) {
    if (!out.empty()) out += ' ';
    out += word(t);
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!split_whitespace(line).empty()) lines.push_back(line);
  }
  return lines;
}

TokenSeq parse_raw_tokens(std::string_view text, std::size_t vocab_size) {
  TokenSeq out;
  for (const auto& field : split_whitespace(text)) {
    long long value = 0;
    auto [ptr, ec] =
        std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw Error(ErrorKind::kInvalidToken, "not an integer token: " + field);
    }
    if (value < 0 || static_cast<unsigned long long>(value) >= vocab_size) {
      throw Error(ErrorKind::kInvalidToken, "token out of range: " + field);
    }
    out.push_back(static_cast<Token>(value));
  }
  return out;
}

}  // namespace refverify
