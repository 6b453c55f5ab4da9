// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include "refverify/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace refverify {

ModelSession::ModelSession(ModelPtr model) : model_(std::move(model)) {
  if (!model_) throw Error(ErrorKind::kInvalidConfig, "null model");
}

const LogitVector& ModelSession::last_logits() const {
  if (cache_.empty()) {
    throw Error(ErrorKind::kRange, "no cached logits in an empty session");
  }
  return cache_.back();
}

const LogitVector& ModelSession::logits_at(std::size_t position) const {
  if (position >= cache_.size()) {
    throw Error(ErrorKind::kRange, "position " + std::to_string(position) +
                                       " beyond cached length " +
                                       std::to_string(cache_.size()));
  }
  return cache_[position];
}

std::vector<LogitVector> ModelSession::forward(
    std::span<const Token> new_tokens) {
  if (new_tokens.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "forward needs at least one token");
  }
  const auto vocab = static_cast<Token>(model_->vocab_size());
  for (Token t : new_tokens) {
    if (t < 0 || t >= vocab) {
      throw Error(ErrorKind::kInvalidToken,
                  "token " + std::to_string(t) + " outside vocabulary of " +
                      std::to_string(vocab));
    }
  }
  ++forward_calls_;
  std::vector<LogitVector> out;
  out.reserve(new_tokens.size());
  for (Token t : new_tokens) {
    tokens_.push_back(t);
    cache_.push_back(model_->next_logits(tokens_));
    out.push_back(cache_.back());
  }
  return out;
}

void ModelSession::truncate(std::size_t keep_length) {
  if (keep_length > tokens_.size()) {
    throw Error(ErrorKind::kRange,
                "truncate to " + std::to_string(keep_length) +
                    " exceeds length " + std::to_string(tokens_.size()));
  }
  tokens_.resize(keep_length);
  cache_.resize(keep_length);
}

void ModelSpec::validate() const {
  if (vocab_size < 2) {
    throw Error(ErrorKind::kInvalidConfig, "vocab_size must be at least 2");
  }
  if (order < 1) throw Error(ErrorKind::kInvalidConfig, "order must be >= 1");
  if (!(logit_bound > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "logit_bound must be positive");
  }
  if (!(smoothing > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "smoothing must be positive");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "eta must lie in [0, 1]");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "beta must lie in [0, 1]");
  }
}

namespace {

std::span<const Token> trailing(std::span<const Token> context,
                                std::size_t order) {
  const std::size_t k = std::min(order, context.size());
  return context.subspan(context.size() - k);
}

class TableModel final : public LanguageModel {
 public:
  explicit TableModel(const ModelSpec& spec)
      : vocab_(spec.vocab_size),
        seed_(spec.seed),
        order_(spec.order),
        bound_(spec.logit_bound) {}

  std::size_t vocab_size() const override { return vocab_; }

  LogitVector next_logits(std::span<const Token> context) const override {
    const auto window = trailing(context, order_);
    std::uint64_t h = mix64(seed_);
    for (Token t : window) h = hash_combine(h, static_cast<std::uint64_t>(t));
    h = hash_combine(h, window.size());
    std::vector<double> logits(vocab_);
    for (std::size_t t = 0; t < vocab_; ++t) {
      const double u =
          static_cast<double>(hash_combine(h, t) >> 11) * 0x1.0p-53;
      logits[t] = bound_ * (2.0 * u - 1.0);
    }
    return LogitVector(std::move(logits));
  }

 private:
  std::size_t vocab_;
  std::uint64_t seed_;
  std::size_t order_;
  double bound_;
};

class NgramModel final : public LanguageModel {
 public:
  NgramModel(const std::vector<TokenSeq>& documents, std::size_t vocab,
             std::size_t order, double smoothing)
      : vocab_(vocab), order_(order), smoothing_(smoothing) {
    for (const auto& doc : documents) {
      for (std::size_t i = 1; i < doc.size(); ++i) {
        const std::size_t start = i > order_ ? i - order_ : 0;
        TokenSeq ctx(doc.begin() + static_cast<std::ptrdiff_t>(start),
                     doc.begin() + static_cast<std::ptrdiff_t>(i));
        auto& counts = counts_[ctx];
        if (counts.next.empty()) counts.next.assign(vocab_, 0);
        ++counts.next[static_cast<std::size_t>(doc[i])];
        ++counts.total;
      }
    }
  }

  std::size_t vocab_size() const override { return vocab_; }

  LogitVector next_logits(std::span<const Token> context) const override {
    const auto window = trailing(context, order_);
    const TokenSeq key(window.begin(), window.end());
    const double v = static_cast<double>(vocab_);
    std::vector<double> logits(vocab_);
    auto it = counts_.find(key);
    if (it == counts_.end()) {
      std::fill(logits.begin(), logits.end(), std::log(1.0 / v));
    } else {
      const double denom = static_cast<double>(it->second.total) + smoothing_ * v;
      for (std::size_t t = 0; t < vocab_; ++t) {
        logits[t] = std::log(
            (static_cast<double>(it->second.next[t]) + smoothing_) / denom);
      }
    }
    return LogitVector(std::move(logits));
  }

 private:
  struct Counts {
    std::vector<std::size_t> next;
    std::size_t total = 0;
  };
  std::size_t vocab_;
  std::size_t order_;
  double smoothing_;
  std::map<TokenSeq, Counts> counts_;
};

// (1 - w) * a + w * b.
class BlendModel final : public LanguageModel {
 public:
  BlendModel(ModelPtr a, ModelPtr b, double w)
      : a_(std::move(a)), b_(std::move(b)), w_(w) {}

  std::size_t vocab_size() const override { return a_->vocab_size(); }

  LogitVector next_logits(std::span<const Token> context) const override {
    const LogitVector la = a_->next_logits(context);
    const LogitVector lb = b_->next_logits(context);
    std::vector<double> out(la.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = (1.0 - w_) * la[i] + w_ * lb[i];
    }
    return LogitVector(std::move(out));
  }

 private:
  ModelPtr a_;
  ModelPtr b_;
  double w_;
};

class ReflectionAwareModel final : public LanguageModel {
 public:
  ReflectionAwareModel(ModelPtr base, Token marker, double beta)
      : base_(std::move(base)), marker_(marker), beta_(beta) {}

  std::size_t vocab_size() const override { return base_->vocab_size(); }

  LogitVector next_logits(std::span<const Token> context) const override {
    LogitVector base = base_->next_logits(context);
    if (beta_ == 0.0) return base;
    const Token copy = reflection_copy_target(context, marker_);
    if (copy < 0) return base;
    std::vector<double> out(base.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double peak =
          static_cast<Token>(i) == copy ? kReflectionPeakLogit : 0.0;
      out[i] = (1.0 - beta_) * base[i] + beta_ * peak;
    }
    return LogitVector(std::move(out));
  }

 private:
  ModelPtr base_;
  Token marker_;
  double beta_;
};

}  // namespace

ModelPtr make_table_model(const ModelSpec& spec) {
  spec.validate();
  return std::make_shared<TableModel>(spec);
}

ModelPtr make_ngram_model(const std::vector<TokenSeq>& documents,
                          std::size_t vocab_size, std::size_t order,
                          double smoothing) {
  if (!(smoothing > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "smoothing must be positive");
  }
  if (vocab_size < 2) {
    throw Error(ErrorKind::kInvalidConfig, "vocab_size must be at least 2");
  }
  if (order < 1) throw Error(ErrorKind::kInvalidConfig, "order must be >= 1");
  std::size_t total = 0;
  for (const auto& doc : documents) {
    for (Token t : doc) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
        throw Error(ErrorKind::kInvalidToken, "corpus token out of range");
      }
    }
    total += doc.size();
  }
  if (total == 0) throw Error(ErrorKind::kInvalidConfig, "empty corpus");
  return std::make_shared<NgramModel>(documents, vocab_size, order, smoothing);
}

std::pair<ModelPtr, ModelPtr> make_divergence_pair(ModelPtr base,
                                                   const ModelSpec& noise_spec,
                                                   double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "eta must lie in [0, 1]");
  }
  if (noise_spec.vocab_size != base->vocab_size()) {
    throw Error(ErrorKind::kInvalidConfig, "noise model vocab mismatch");
  }
  ModelPtr noise = make_table_model(noise_spec);
  ModelPtr draft = std::make_shared<BlendModel>(base, std::move(noise), eta);
  return {std::move(base), std::move(draft)};
}

std::pair<ModelPtr, ModelPtr> make_divergence_pair(const ModelSpec& base_spec,
                                                   double eta) {
  ModelSpec noise_spec = base_spec;
  noise_spec.seed = hash_combine(base_spec.seed, 0x6e6f697365ULL);
  return make_divergence_pair(make_table_model(base_spec), noise_spec, eta);
}

ModelPtr make_reflection_aware(ModelPtr base, Token marker, double beta) {
  if (marker < 0 || static_cast<std::size_t>(marker) >= base->vocab_size()) {
    throw Error(ErrorKind::kInvalidConfig, "marker outside vocabulary");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "beta must lie in [0, 1]");
  }
  return std::make_shared<ReflectionAwareModel>(std::move(base), marker, beta);
}

Token reflection_copy_target(std::span<const Token> context, Token marker) {
  const auto rit = std::find(context.rbegin(), context.rend(), marker);
  if (rit == context.rend()) return -1;
  const std::size_t marker_pos =
      static_cast<std::size_t>(context.rend() - rit) - 1;
  const std::size_t after = context.size() - marker_pos - 1;
  if (after == 0 || after >= marker_pos) return -1;
  // The whole post-marker suffix must replay an earlier stretch; the copy is
  // whatever followed its most recent occurrence before the marker.
  const auto pattern = context.subspan(marker_pos + 1);
  for (std::size_t s = marker_pos - after; s-- > 0;) {
    if (std::equal(pattern.begin(), pattern.end(), context.begin() + s)) {
      return context[s + after];
    }
  }
  return -1;
}

}  // namespace refverify
