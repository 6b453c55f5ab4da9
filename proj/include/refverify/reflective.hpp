// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refverify/drafting.hpp"

namespace refverify {

class Vocabulary;

/// Reflection probe plus the number of trailing committed tokens replayed
/// before the second draft copy. An empty probe is legal.
struct ReflectiveTemplate {
  TokenSeq prompt_tokens;
  std::size_t prefix_len = 4;
  // false: feed the draft once, no reflective segment at all.
  bool reflective = true;
};

// Parses the placeholder form "${draft} <probe words> ${prefix} ${draft}".
// "${draft}" alone yields a non-reflective template; omitting ${prefix}
// forces prefix_len to 0. The caller maps probe words to tokens.
struct ParsedTemplate {
  std::vector<std::string> probe_words;
  bool has_prefix = false;
  bool reflective = true;
};
ParsedTemplate parse_template(std::string_view text);

/// The assembled reflective input:
///   draft ++ prompt ++ prefix ++ draft
/// For a non-reflective template the sequence is the draft alone and the
/// shift bookkeeping is left at zero.
struct ReflectiveLayout {
  TokenSeq full_sequence;
  std::size_t gamma = 0;
  std::size_t prompt_len = 0;
  std::size_t prefix_len = 0;
  bool reflective = true;

  std::size_t template_len() const { return prompt_len + prefix_len; }
  std::size_t shift_len() const { return gamma + template_len(); }
  // 1-based index of the first reflective output, matching o_m.
  std::size_t m() const { return shift_len() + 1; }

  std::size_t draft1_begin() const { return 0; }
  std::size_t prompt_begin() const { return gamma; }
  std::size_t prefix_begin() const { return gamma + prompt_len; }
  std::size_t draft2_begin() const { return shift_len(); }
};

ReflectiveLayout build_reflective_input(std::span<const Token> draft_tokens,
                                        const ReflectiveTemplate& tmpl,
                                        std::span<const Token> committed);
inline ReflectiveLayout build_reflective_input(
    const DraftBundle& draft, const ReflectiveTemplate& tmpl,
    std::span<const Token> committed) {
  return build_reflective_input(draft.tokens, tmpl, committed);
}

struct PairedLogits {
  // original[i] predicts draft token i; original[gamma] is the bonus slot.
  std::vector<LogitVector> original;
  // reflective[i] is the mirrored output in the second copy. Empty for a
  // non-reflective layout.
  std::vector<LogitVector> reflective;
  // Tokens fed in the single forward (pending committed + full sequence).
  std::size_t tokens_fed = 0;
};

// One forward over committed[session.size():] ++ layout.full_sequence. The
// session is left unpruned.
PairedLogits paired_forward(ModelSession& session,
                            std::span<const Token> committed,
                            const ReflectiveLayout& layout);

struct FusionConfig {
  double alpha = 0.3;
  // 0 selects greedy one-hot distributions.
  double temperature = 1.0;

  void validate() const;
};

// (1 - alpha) * original + alpha * reflective, element-wise.
LogitVector fused_logits(const LogitVector& original,
                         const LogitVector& reflective, double alpha);

std::vector<Distribution> fuse(std::span<const LogitVector> original,
                               std::span<const LogitVector> reflective,
                               const FusionConfig& config);

}  // namespace refverify
