// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include "refverify/verification.hpp"

#include <algorithm>
#include <cmath>

namespace refverify {

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kExactMatch: return "exact";
    case Strategy::kSpeculativeSampling: return "specsample";
    case Strategy::kTypical: return "typical";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "exact") return Strategy::kExactMatch;
  if (name == "specsample") return Strategy::kSpeculativeSampling;
  if (name == "typical") return Strategy::kTypical;
  throw Error(ErrorKind::kInvalidConfig, "unknown strategy '" + name + "'");
}

namespace {

void check_lengths(std::size_t p_len, std::size_t gamma) {
  if (gamma == 0 || p_len != gamma + 1) {
    throw Error(ErrorKind::kInternal,
                "verification needs gamma + 1 target distributions");
  }
}

}  // namespace

VerificationResult verify_exact_match(std::span<const Distribution> p,
                                      std::span<const Token> draft_tokens,
                                      Rng& rng) {
  const std::size_t gamma = draft_tokens.size();
  check_lengths(p.size(), gamma);
  VerificationResult result;
  result.strategy = Strategy::kExactMatch;

  std::vector<Token> target_draws(gamma);
  for (std::size_t i = 0; i < gamma; ++i) target_draws[i] = sample(p[i], rng);

  std::size_t n = 0;
  while (n < gamma) {
    const bool match = target_draws[n] == draft_tokens[n];
    result.per_step_accepts.push_back(match);
    result.diagnostics.push_back(static_cast<double>(target_draws[n]));
    if (!match) break;
    ++n;
  }
  result.accepted_n = n;
  result.bonus = sample(p[n], rng);
  return result;
}

VerificationResult verify_speculative_sampling(
    std::span<const Distribution> p, std::span<const Distribution> q,
    std::span<const Token> draft_tokens, Rng& rng) {
  const std::size_t gamma = draft_tokens.size();
  check_lengths(p.size(), gamma);
  if (q.size() != gamma) {
    throw Error(ErrorKind::kInternal, "need one draft distribution per token");
  }
  VerificationResult result;
  result.strategy = Strategy::kSpeculativeSampling;

  std::vector<double> r(gamma);
  for (double& ri : r) ri = rng.uniform();

  std::size_t n = 0;
  while (n < gamma) {
    const double qx = q[n].prob(draft_tokens[n]);
    if (!(qx > 0.0)) {
      throw Error(ErrorKind::kInternal, "draft token has zero draft mass");
    }
    const double ratio = p[n].prob(draft_tokens[n]) / qx;
    const bool accept = r[n] <= std::min(1.0, ratio);
    result.per_step_accepts.push_back(accept);
    result.diagnostics.push_back(ratio);
    if (!accept) break;
    ++n;
  }
  result.accepted_n = n;
  result.bonus = n < gamma ? sample(residual_distribution(p[n], q[n]), rng)
                           : sample(p[gamma], rng);
  return result;
}

Distribution residual_distribution(const Distribution& p,
                                   const Distribution& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::kInternal, "residual of mismatched distributions");
  }
  std::vector<double> out(p.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max(0.0, p[i] - q[i]);
    mass += out[i];
  }
  if (mass < 1e-12) {
    throw Error(ErrorKind::kDegenerateResidual,
                "residual mass below 1e-12; no rejection was possible");
  }
  for (double& v : out) v /= mass;
  return Distribution(std::move(out));
}

void TypicalConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0) || !(delta > 0.0 && delta <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig,
                "typical epsilon and delta must lie in (0, 1]");
  }
}

double typical_threshold(const Distribution& entropy_source,
                         const TypicalConfig& config) {
  return std::min(config.epsilon,
                  config.delta * std::exp(-entropy(entropy_source)));
}

VerificationResult verify_typical(std::span<const Distribution> p_fused,
                                  std::span<const Distribution> entropy_source,
                                  std::span<const Token> draft_tokens,
                                  const TypicalConfig& config, Rng& rng) {
  config.validate();
  const std::size_t gamma = draft_tokens.size();
  check_lengths(p_fused.size(), gamma);
  if (entropy_source.size() < gamma) {
    throw Error(ErrorKind::kInternal, "entropy source shorter than the draft");
  }
  VerificationResult result;
  result.strategy = Strategy::kTypical;

  std::size_t n = 0;
  while (n < gamma) {
    const double threshold = typical_threshold(entropy_source[n], config);
    const bool accept = p_fused[n].prob(draft_tokens[n]) > threshold;
    result.per_step_accepts.push_back(accept);
    result.diagnostics.push_back(threshold);
    if (!accept) break;
    ++n;
  }
  result.accepted_n = n;
  result.bonus = sample(p_fused[n], rng);
  return result;
}

Distribution exact_step_distribution(const Distribution& p,
                                     const Distribution& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::kInternal, "distributions differ in size");
  }
  std::vector<double> out(p.size(), 0.0);
  double accept_mass = 0.0;
  for (std::size_t x = 0; x < out.size(); ++x) {
    if (q[x] <= 0.0) continue;
    const double accepted = q[x] * std::min(1.0, p[x] / q[x]);
    out[x] += accepted;
    accept_mass += accepted;
  }
  const double reject_mass = 1.0 - accept_mass;
  double residual_mass = 0.0;
  for (std::size_t x = 0; x < out.size(); ++x) {
    residual_mass += std::max(0.0, p[x] - q[x]);
  }
  // p == q up to rounding: every draft is accepted.
  if (residual_mass >= 1e-12) {
    const Distribution residual = residual_distribution(p, q);
    for (std::size_t x = 0; x < out.size(); ++x) {
      out[x] += reject_mass * residual[x];
    }
  }
  return Distribution(std::move(out));
}

}  // namespace refverify
