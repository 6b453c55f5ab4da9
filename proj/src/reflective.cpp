// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include "refverify/reflective.hpp"

#include <algorithm>
#include <string>

#include "refverify/vocabulary.hpp"

namespace refverify {

namespace {

constexpr std::string_view kDraftPlaceholder = "${draft}";
constexpr std::string_view kPrefixPlaceholder = "${prefix}";

// Splits `text` into words, cutting placeholders out of any surrounding text.
std::vector<std::string> template_fields(std::string_view text) {
  std::vector<std::string> fields;
  for (const auto& word : split_whitespace(text)) {
    std::string_view rest = word;
    while (!rest.empty()) {
      const auto d = rest.find(kDraftPlaceholder);
      const auto p = rest.find(kPrefixPlaceholder);
      const auto at = std::min(d, p);
      if (at == std::string_view::npos) {
        fields.emplace_back(rest);
        break;
      }
      if (at > 0) fields.emplace_back(rest.substr(0, at));
      const auto len =
          at == d ? kDraftPlaceholder.size() : kPrefixPlaceholder.size();
      fields.emplace_back(rest.substr(at, len));
      rest.remove_prefix(at + len);
    }
  }
  return fields;
}

}  // namespace

ParsedTemplate parse_template(std::string_view text) {
  const auto fields = template_fields(text);
  auto bad = [&](const std::string& why) {
    return Error(ErrorKind::kInvalidConfig,
                 "template '" + std::string(text) + "': " + why);
  };
  if (fields.empty() || fields.front() != kDraftPlaceholder) {
    throw bad("must start with ${draft}");
  }
  ParsedTemplate parsed;
  if (fields.size() == 1) {
    parsed.reflective = false;
    return parsed;
  }
  if (fields.back() != kDraftPlaceholder) throw bad("must end with ${draft}");
  bool seen_prefix = false;
  for (std::size_t i = 1; i + 1 < fields.size(); ++i) {
    const auto& f = fields[i];
    if (f == kDraftPlaceholder) throw bad("${draft} may appear only twice");
    if (f == kPrefixPlaceholder) {
      if (seen_prefix) throw bad("${prefix} may appear only once");
      seen_prefix = true;
      continue;
    }
    if (seen_prefix) throw bad("no probe text allowed after ${prefix}");
    parsed.probe_words.push_back(f);
  }
  parsed.has_prefix = seen_prefix;
  return parsed;
}

ReflectiveLayout build_reflective_input(std::span<const Token> draft_tokens,
                                        const ReflectiveTemplate& tmpl,
                                        std::span<const Token> committed) {
  if (draft_tokens.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "draft must hold at least one token");
  }
  ReflectiveLayout layout;
  layout.gamma = draft_tokens.size();
  layout.reflective = tmpl.reflective;
  auto& seq = layout.full_sequence;
  seq.assign(draft_tokens.begin(), draft_tokens.end());
  if (!tmpl.reflective) return layout;

  layout.prompt_len = tmpl.prompt_tokens.size();
  layout.prefix_len = std::min(tmpl.prefix_len, committed.size());
  seq.reserve(2 * layout.gamma + layout.template_len());
  seq.insert(seq.end(), tmpl.prompt_tokens.begin(), tmpl.prompt_tokens.end());
  const auto prefix = committed.subspan(committed.size() - layout.prefix_len);
  seq.insert(seq.end(), prefix.begin(), prefix.end());
  seq.insert(seq.end(), draft_tokens.begin(), draft_tokens.end());
  return layout;
}

PairedLogits paired_forward(ModelSession& session,
                            std::span<const Token> committed,
                            const ReflectiveLayout& layout) {
  const auto& held = session.tokens();
  if (committed.empty() || held.size() > committed.size() ||
      !std::equal(held.begin(), held.end(), committed.begin())) {
    throw Error(ErrorKind::kInternal,
                "target session does not hold a prefix of the committed tokens");
  }
  const std::size_t expected =
      layout.reflective ? 2 * layout.gamma + layout.template_len()
                        : layout.gamma;
  if (layout.gamma == 0 || layout.full_sequence.size() != expected) {
    throw Error(ErrorKind::kInternal, "malformed reflective layout");
  }

  const std::size_t base = committed.size();
  TokenSeq input(committed.begin() + static_cast<std::ptrdiff_t>(held.size()),
                 committed.end());
  input.insert(input.end(), layout.full_sequence.begin(),
               layout.full_sequence.end());
  session.forward(input);

  // Absolute position j yields the logits predicting token j + 1.
  PairedLogits out;
  out.tokens_fed = input.size();
  out.original.reserve(layout.gamma + 1);
  for (std::size_t i = 0; i <= layout.gamma; ++i) {
    out.original.push_back(session.logits_at(base - 1 + i));
  }
  if (layout.reflective) {
    out.reflective.reserve(layout.gamma + 1);
    for (std::size_t i = 0; i <= layout.gamma; ++i) {
      out.reflective.push_back(
          session.logits_at(base - 1 + layout.shift_len() + i));
    }
  }
  return out;
}

void FusionConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "alpha must lie in [0, 1]");
  }
  if (!(temperature >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "temperature must be >= 0");
  }
}

LogitVector fused_logits(const LogitVector& original,
                         const LogitVector& reflective, double alpha) {
  if (original.size() != reflective.size()) {
    throw Error(ErrorKind::kInternal, "logit vectors differ in size");
  }
  std::vector<double> out(original.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - alpha) * original[i] + alpha * reflective[i];
  }
  return LogitVector(std::move(out));
}

std::vector<Distribution> fuse(std::span<const LogitVector> original,
                               std::span<const LogitVector> reflective,
                               const FusionConfig& config) {
  config.validate();
  if (original.size() != reflective.size()) {
    throw Error(ErrorKind::kInternal,
                "original and reflective sequences differ in length");
  }
  std::vector<Distribution> out;
  out.reserve(original.size());
  for (std::size_t i = 0; i < original.size(); ++i) {
    out.push_back(to_distribution(
        fused_logits(original[i], reflective[i], config.alpha),
        config.temperature));
  }
  return out;
}

}  // namespace refverify
