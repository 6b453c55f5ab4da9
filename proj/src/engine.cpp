// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include "refverify/engine.hpp"

#include <chrono>
#include <sstream>

namespace refverify {

void DecodeConfig::validate() const {
  if (mode == DecodeMode::kSpeculative && gamma < 1) {
    throw Error(ErrorKind::kInvalidConfig, "gamma must be >= 1");
  }
  if (max_new_tokens < 1) {
    throw Error(ErrorKind::kInvalidConfig, "max_new_tokens must be >= 1");
  }
  FusionConfig{alpha, temperature}.validate();
  if (strategy == Strategy::kTypical) typical.validate();
}

void RunStats::add(const StepStats& step) {
  total_accepted += step.accepted_n;
  total_emitted += step.tokens_emitted;
  output_tokens += step.tokens_committed;
  target_forwards += step.target_forward_count;
  draft_forwards += step.draft_forward_count;
  input_tokens_fed += step.input_tokens_fed;
  wall_seconds += step.wall_seconds;
  steps.push_back(step);
}

void commit_and_prune(ModelSession& target_session,
                      ModelSession& draft_session,
                      std::size_t committed_length,
                      const VerificationResult& result) {
  const std::size_t keep = committed_length + result.accepted_n;
  target_session.truncate(keep);
  if (draft_session.size() > keep) draft_session.truncate(keep);
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<Distribution> plain_distributions(
    std::span<const LogitVector> logits, double temperature) {
  std::vector<Distribution> out;
  out.reserve(logits.size());
  for (const auto& l : logits) out.push_back(to_distribution(l, temperature));
  return out;
}

void check_draft_segment_causality(const ModelSession& session,
                                   std::span<const Token> committed,
                                   const DraftBundle& draft,
                                   const PairedLogits& logits) {
  TokenSeq context(committed.begin(), committed.end());
  for (std::size_t i = 0; i <= draft.gamma(); ++i) {
    if (session.model().next_logits(context) != logits.original[i]) {
      throw Error(ErrorKind::kInternal,
                  "reflective tail changed draft-segment logits");
    }
    if (i < draft.gamma()) context.push_back(draft.tokens[i]);
  }
}

}  // namespace

DecodeResult decode(const ModelPtr& target, const ModelPtr& draft,
                    std::span<const Token> prompt, const DecodeConfig& config,
                    const StepObserver& observer) {
  config.validate();
  if (!target || !draft) throw Error(ErrorKind::kInvalidConfig, "null model");
  if (target->vocab_size() != draft->vocab_size()) {
    throw Error(ErrorKind::kInvalidConfig,
                "target and draft vocabularies differ");
  }
  if (prompt.empty()) throw Error(ErrorKind::kInvalidConfig, "empty prompt");

  Rng rng(config.seed);
  ModelSession target_session(target);
  ModelSession draft_session(draft);
  TokenSeq committed(prompt.begin(), prompt.end());
  DecodeResult out;
  bool finished = false;

  while (!finished && out.output.size() < config.max_new_tokens) {
    StepStats step;
    TokenSeq emitted;

    if (config.mode == DecodeMode::kAutoregressive) {
      const auto t0 = Clock::now();
      step.input_tokens_fed = committed.size() - target_session.size();
      step.target_forward_count = sync_session(target_session, committed);
      const Token t = sample(
          to_distribution(target_session.last_logits(), config.temperature),
          rng);
      step.wall_seconds =
          std::chrono::duration<double>(Clock::now() - t0).count();
      step.input_budget = 1;
      step.bonus = t;
      emitted.push_back(t);
    } else {
      const std::size_t committed_len = committed.size();
      DraftBundle bundle = generate_draft(draft_session, committed,
                                          config.gamma, config.temperature, rng);

      const auto t0 = Clock::now();
      const ReflectiveLayout layout = build_reflective_input(
          bundle, config.reflective_template, committed);
      const PairedLogits logits =
          paired_forward(target_session, committed, layout);
      if (config.check_causality) {
        check_draft_segment_causality(target_session, committed, bundle,
                                      logits);
      }

      const std::vector<Distribution> fused =
          layout.reflective
              ? fuse(logits.original, logits.reflective,
                     FusionConfig{config.alpha, config.temperature})
              : plain_distributions(logits.original, config.temperature);

      VerificationResult result;
      switch (config.strategy) {
        case Strategy::kExactMatch:
          result = verify_exact_match(fused, bundle.tokens, rng);
          break;
        case Strategy::kSpeculativeSampling:
          result = verify_speculative_sampling(fused, bundle.q_dists,
                                               bundle.tokens, rng);
          break;
        case Strategy::kTypical:
          if (config.entropy_source == EntropySource::kOriginal) {
            const auto original =
                plain_distributions(logits.original, config.temperature);
            result = verify_typical(fused, original, bundle.tokens,
                                    config.typical, rng);
          } else {
            result = verify_typical(fused, fused, bundle.tokens,
                                    config.typical, rng);
          }
          break;
      }
      step.wall_seconds =
          std::chrono::duration<double>(Clock::now() - t0).count();

      if (observer) {
        StepTrace trace{committed,       &bundle, &layout,
                        &logits,         &fused,  &result,
                        &target_session, &draft_session};
        observer(trace);
      }
      commit_and_prune(target_session, draft_session, committed_len, result);

      step.accepted_n = result.accepted_n;
      step.per_step_accepts = result.per_step_accepts;
      step.bonus = result.bonus;
      step.target_forward_count = 1;
      step.draft_forward_count = bundle.draft_forward_count;
      step.input_tokens_fed = logits.tokens_fed;
      step.input_budget = layout.full_sequence.size();
      emitted.assign(bundle.tokens.begin(),
                     bundle.tokens.begin() +
                         static_cast<std::ptrdiff_t>(result.accepted_n));
      emitted.push_back(result.bonus);
    }

    step.tokens_emitted = emitted.size();
    for (Token t : emitted) {
      if (out.output.size() >= config.max_new_tokens) break;
      committed.push_back(t);
      out.output.push_back(t);
      ++step.tokens_committed;
      if (config.eos_token && t == *config.eos_token) {
        finished = true;
        break;
      }
    }
    out.stats.add(step);
  }
  return out;
}

std::string format_trace(const DecodeResult& result) {
  std::ostringstream os;
  os << "output";
  for (Token t : result.output) os << ' ' << t;
  os << '\n';
  for (std::size_t i = 0; i < result.stats.steps.size(); ++i) {
    const auto& s = result.stats.steps[i];
    os << "step " << i << " accepted " << s.accepted_n << " bonus " << s.bonus
       << " committed " << s.tokens_committed << '\n';
  }
  os << "totals emitted " << result.stats.total_emitted << " output "
     << result.stats.output_tokens << " forwards "
     << result.stats.target_forwards << '\n';
  return os.str();
}

}  // namespace refverify
