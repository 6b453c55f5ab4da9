// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "refverify/tokenspace.hpp"

namespace refverify {

/// A causal next-token scorer. `next_logits(context)` returns the logits at
/// the last position of `context`, i.e. the prediction for the token that
/// would follow it. Implementations are immutable and thread-safe; the only
/// state a decode loop carries lives in ModelSession.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual std::size_t vocab_size() const = 0;
  virtual LogitVector next_logits(std::span<const Token> context) const = 0;
};

using ModelPtr = std::shared_ptr<const LanguageModel>;

/// Committed tokens of one decode stream plus the cached per-position
/// outputs (the KV-cache role for the toy backends). Single owner.
class ModelSession {
 public:
  explicit ModelSession(ModelPtr model);

  const LanguageModel& model() const { return *model_; }
  std::size_t size() const { return tokens_.size(); }
  const TokenSeq& tokens() const { return tokens_; }
  std::size_t cached_length() const { return cache_.size(); }

  // Logits produced at the last committed position. Requires size() > 0.
  const LogitVector& last_logits() const;
  const LogitVector& logits_at(std::size_t position) const;

  // Appends `new_tokens` and returns the logits at each appended position,
  // each predicting the token that follows it.
  std::vector<LogitVector> forward(std::span<const Token> new_tokens);

  // Drops everything past `keep_length`. Later forwards behave as if the
  // dropped tokens were never fed.
  void truncate(std::size_t keep_length);

  std::size_t forward_calls() const { return forward_calls_; }

 private:
  ModelPtr model_;
  TokenSeq tokens_;
  std::vector<LogitVector> cache_;
  std::size_t forward_calls_ = 0;
};

enum class ModelKind { kTable, kNgram, kDivergenceDraft, kReflectionAware };

struct ModelSpec {
  ModelKind kind = ModelKind::kTable;
  std::size_t vocab_size = 32;
  std::uint64_t seed = 1234;
  // table / ngram context order k
  std::size_t order = 2;
  // table logit range is [-logit_bound, logit_bound]
  double logit_bound = 4.0;
  // ngram add-lambda smoothing
  double smoothing = 1.0;
  // divergence pair noise rate
  double eta = 0.0;
  // reflection-aware blend strength and marker token
  double beta = 0.0;
  Token marker = 0;

  void validate() const;
};

// Logits are a pure hash of (seed, last `order` context tokens, candidate),
// mapped into [-logit_bound, logit_bound].
ModelPtr make_table_model(const ModelSpec& spec);

// Count model trained on `documents` (each one a token sequence; counts never
// span documents). Logits are log((c(ctx,t) + lambda) / (c(ctx) + lambda V))
// for the longest available context of up to `order` tokens.
ModelPtr make_ngram_model(const std::vector<TokenSeq>& documents,
                          std::size_t vocab_size, std::size_t order,
                          double smoothing);

// Target is `base`; the draft scores (1 - eta) * base + eta * independent
// table logits. eta = 0 gives identical models.
std::pair<ModelPtr, ModelPtr> make_divergence_pair(ModelPtr base,
                                                   const ModelSpec& noise_spec,
                                                   double eta);
std::pair<ModelPtr, ModelPtr> make_divergence_pair(const ModelSpec& base_spec,
                                                   double eta);

// Wraps `base` so that, when everything after the last `marker` replays an
// earlier stretch of the context, the logits are blended with weight `beta`
// toward a peaked vector on the token that followed that stretch (an
// induction-style copy). With the "[BACK] ${prefix}" layout this re-emits
// the first draft copy. Otherwise the output equals `base` exactly.
ModelPtr make_reflection_aware(ModelPtr base, Token marker, double beta);

// Logit value given to the copied token by the reflection-aware wrapper
// before blending.
inline constexpr double kReflectionPeakLogit = 8.0;

// Token the reflection-aware wrapper copies for `context`, or -1 when no
// marker or no usable mirrored match exists.
Token reflection_copy_target(std::span<const Token> context, Token marker);

}  // namespace refverify
