// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "refverify/reflective.hpp"
#include "refverify/verification.hpp"

namespace refverify {

enum class DecodeMode { kSpeculative, kAutoregressive };
enum class EntropySource { kOriginal, kFused };

struct DecodeConfig {
  DecodeMode mode = DecodeMode::kSpeculative;
  std::size_t gamma = 5;
  double alpha = 0.3;
  // 0 selects greedy decoding everywhere.
  double temperature = 0.8;
  Strategy strategy = Strategy::kSpeculativeSampling;
  TypicalConfig typical;
  EntropySource entropy_source = EntropySource::kOriginal;
  ReflectiveTemplate reflective_template;
  std::size_t max_new_tokens = 64;
  std::optional<Token> eos_token;
  std::uint64_t seed = 0;
  // Re-derive the draft-segment logits without the reflective tail each step
  // and throw kInternal if they differ.
  bool check_causality = false;

  void validate() const;
};

struct StepStats {
  std::size_t accepted_n = 0;
  std::size_t tokens_emitted = 0;    // accepted_n + 1
  std::size_t tokens_committed = 0;  // after eos / max-token truncation
  std::size_t target_forward_count = 0;
  std::size_t draft_forward_count = 0;
  std::size_t input_tokens_fed = 0;
  std::size_t input_budget = 0;
  std::vector<bool> per_step_accepts;
  Token bonus = 0;
  double wall_seconds = 0.0;
};

struct RunStats {
  std::vector<StepStats> steps;
  std::size_t total_accepted = 0;
  std::size_t total_emitted = 0;
  std::size_t output_tokens = 0;
  std::size_t target_forwards = 0;
  std::size_t draft_forwards = 0;
  std::size_t input_tokens_fed = 0;
  double wall_seconds = 0.0;

  void add(const StepStats& step);
};

struct DecodeResult {
  TokenSeq output;
  RunStats stats;
};

// What the engine saw in one speculative step; handed to the observer before
// the sessions are pruned.
struct StepTrace {
  TokenSeq committed_before;
  const DraftBundle* draft = nullptr;
  const ReflectiveLayout* layout = nullptr;
  const PairedLogits* logits = nullptr;
  const std::vector<Distribution>* fused = nullptr;
  const VerificationResult* result = nullptr;
  const ModelSession* target_session = nullptr;
  const ModelSession* draft_session = nullptr;
};
using StepObserver = std::function<void(const StepTrace&)>;

// Drops the probe / prefix replay / second copy and any rejected draft
// tokens from the target cache, and rolls the draft cache back to the same
// committed boundary. The bonus token is fed at the start of the next
// forward.
void commit_and_prune(ModelSession& target_session,
                      ModelSession& draft_session,
                      std::size_t committed_length,
                      const VerificationResult& result);

DecodeResult decode(const ModelPtr& target, const ModelPtr& draft,
                    std::span<const Token> prompt, const DecodeConfig& config,
                    const StepObserver& observer = {});

// Timing-free text rendering of a run: output tokens and per-step
// accepted_n / bonus. Two runs with identical behavior render identically.
std::string format_trace(const DecodeResult& result);

}  // namespace refverify
