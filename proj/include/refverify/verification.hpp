// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "refverify/tokenspace.hpp"

namespace refverify {

enum class Strategy { kExactMatch, kSpeculativeSampling, kTypical };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

struct VerificationResult {
  std::size_t accepted_n = 0;
  Token bonus = 0;
  std::vector<bool> per_step_accepts;
  Strategy strategy = Strategy::kSpeculativeSampling;
  // Per evaluated step: acceptance ratio (speculative sampling), threshold
  // (typical) or sampled target token (exact match).
  std::vector<double> diagnostics;
};

// Exact-match: x_hat_i ~ p_i for every i <= gamma; n is the first mismatch;
// bonus ~ p_{n+1}. Consumes gamma + 1 uniforms.
VerificationResult verify_exact_match(std::span<const Distribution> p,
                                      std::span<const Token> draft_tokens,
                                      Rng& rng);

// Rejection sampling: accept x_i iff r_i <= min(1, p_i(x_i) / q_i(x_i)).
// All gamma uniforms are drawn up front, then one more for the bonus.
VerificationResult verify_speculative_sampling(
    std::span<const Distribution> p, std::span<const Distribution> q,
    std::span<const Token> draft_tokens, Rng& rng);

// norm(max(0, p - q)).
Distribution residual_distribution(const Distribution& p,
                                   const Distribution& q);

// Defaults follow the usual Medusa posterior settings.
struct TypicalConfig {
  double epsilon = 0.09;
  double delta = 0.3;

  void validate() const;
};

double typical_threshold(const Distribution& entropy_source,
                         const TypicalConfig& config);

// Accept x_i iff p_fused_i(x_i) > min(eps, delta * exp(-H(source_i))).
// Consumes one uniform (the bonus).
VerificationResult verify_typical(std::span<const Distribution> p_fused,
                                  std::span<const Distribution> entropy_source,
                                  std::span<const Token> draft_tokens,
                                  const TypicalConfig& config, Rng& rng);

// Exact one-step output law of draft-then-verify at gamma = 1, by summation.
Distribution exact_step_distribution(const Distribution& p,
                                     const Distribution& q);

}  // namespace refverify
