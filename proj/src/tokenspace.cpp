// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include "refverify/tokenspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace refverify {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidLogits: return "invalid-logits";
    case ErrorKind::kInvalidConfig: return "invalid-config";
    case ErrorKind::kInvalidToken: return "invalid-token";
    case ErrorKind::kInvalidDistribution: return "invalid-distribution";
    case ErrorKind::kRange: return "range";
    case ErrorKind::kDegenerateResidual: return "degenerate-residual";
    case ErrorKind::kInternal: return "internal";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

LogitVector::LogitVector(std::vector<double> values)
    : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidLogits, "non-finite logit");
    }
  }
}

Distribution::Distribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) {
    throw Error(ErrorKind::kInvalidDistribution, "empty distribution");
  }
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::kInvalidDistribution,
                  "negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error(ErrorKind::kInvalidDistribution,
                "probabilities sum to " + std::to_string(sum));
  }
}

Distribution Distribution::one_hot(std::size_t vocab_size, Token token) {
  if (token < 0 || static_cast<std::size_t>(token) >= vocab_size) {
    throw Error(ErrorKind::kInvalidToken, "one-hot token out of range");
  }
  std::vector<double> probs(vocab_size, 0.0);
  probs[static_cast<std::size_t>(token)] = 1.0;
  return Distribution(std::move(probs));
}

Distribution Distribution::uniform(std::size_t vocab_size) {
  return Distribution(
      std::vector<double>(vocab_size, 1.0 / static_cast<double>(vocab_size)));
}

Distribution softmax(const LogitVector& logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::kInvalidConfig, "temperature must be positive");
  }
  if (logits.size() == 0) {
    throw Error(ErrorKind::kInvalidLogits, "empty logit vector");
  }
  const auto values = logits.values();
  const double max_value = *std::max_element(values.begin(), values.end());
  std::vector<double> probs(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    probs[i] = std::exp((values[i] - max_value) / temperature);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
  return Distribution(std::move(probs));
}

Distribution to_distribution(const LogitVector& logits, double temperature) {
  if (temperature == 0.0) {
    return Distribution::one_hot(logits.size(), greedy(logits));
  }
  return softmax(logits, temperature);
}

double entropy(const Distribution& dist) {
  double h = 0.0;
  for (double p : dist.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

Token sample(const Distribution& dist, Rng& rng) {
  const double u = rng.uniform();
  const auto probs = dist.probs();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = i;
    cumulative += probs[i];
    if (u < cumulative) return static_cast<Token>(i);
  }
  // Rounding left the total just under u.
  return static_cast<Token>(last_positive);
}

namespace {

template <typename Values>
Token argmax_lowest(const Values& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<Token>(best);
}

}  // namespace

Token greedy(const Distribution& dist) { return argmax_lowest(dist.probs()); }
Token greedy(const LogitVector& logits) {
  return argmax_lowest(logits.values());
}

}  // namespace refverify
