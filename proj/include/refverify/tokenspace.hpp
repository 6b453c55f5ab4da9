// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "refverify/error.hpp"
#include "refverify/rng.hpp"

namespace refverify {

using Token = std::int32_t;
using TokenSeq = std::vector<Token>;

/// Unnormalized next-token scores over the vocabulary. All entries finite.
class LogitVector {
 public:
  LogitVector() = default;
  explicit LogitVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const LogitVector&, const LogitVector&) = default;

 private:
  std::vector<double> values_;
};

/// Probability vector over the vocabulary: non-negative, sums to 1 within
/// 1e-9. Validated on construction.
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  Distribution() = default;
  explicit Distribution(std::vector<double> probs);

  static Distribution one_hot(std::size_t vocab_size, Token token);
  static Distribution uniform(std::size_t vocab_size);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  double prob(Token t) const { return probs_.at(static_cast<std::size_t>(t)); }
  std::span<const double> probs() const { return probs_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

// Stabilized softmax of values / temperature.
Distribution softmax(const LogitVector& logits, double temperature);

// Temperature 0 selects the greedy one-hot limit; positive temperatures
// defer to softmax.
Distribution to_distribution(const LogitVector& logits, double temperature);

// Shannon entropy in nats, with 0 log 0 = 0.
double entropy(const Distribution& dist);

// Inverse-CDF draw in ascending token order. Consumes exactly one uniform.
Token sample(const Distribution& dist, Rng& rng);

// Lowest token id among the maxima.
Token greedy(const Distribution& dist);
Token greedy(const LogitVector& logits);

}  // namespace refverify
