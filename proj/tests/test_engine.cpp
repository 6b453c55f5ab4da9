// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "reference_decoder.hpp"
#include "refverify/bench.hpp"
#include "refverify/engine.hpp"

using namespace refverify;

namespace {

constexpr std::size_t kVocab = 32;
constexpr Token kMarker = 31;

ModelSpec base_spec() {
  ModelSpec s;
  s.vocab_size = kVocab;
  s.seed = 1234;
  s.order = 2;
  return s;
}

std::pair<ModelPtr, ModelPtr> reflective_pair(double eta, double beta = 0.5) {
  auto [target, draft] = make_divergence_pair(base_spec(), eta);
  return {make_reflection_aware(target, kMarker, beta), draft};
}

TokenSeq prompt_for(std::uint64_t i) {
  Rng rng(hash_combine(i, 77));
  TokenSeq p(6);
  for (auto& t : p) t = static_cast<Token>(rng.next_u64() % (kVocab - 1));
  return p;
}

DecodeConfig reflect_config(Strategy s, double alpha, std::uint64_t seed) {
  DecodeConfig c;
  c.strategy = s;
  c.alpha = alpha;
  c.gamma = 5;
  c.temperature = 0.8;
  c.max_new_tokens = 40;
  c.seed = seed;
  c.reflective_template = ReflectiveTemplate{{kMarker}, 4, true};
  return c;
}

}  // namespace

TEST_CASE("identical models under greedy exact match accept every draft") {
  const auto m = make_table_model(base_spec());
  DecodeConfig c;
  c.strategy = Strategy::kExactMatch;
  c.temperature = 0.0;
  c.gamma = 4;
  c.max_new_tokens = 100;
  c.alpha = 0.0;
  const auto r = decode(m, m, prompt_for(1), c);
  for (const auto& s : r.stats.steps) CHECK(s.accepted_n == 4);
  CHECK(r.stats.steps.size() == 20);
  CHECK(mean_accepted_tokens(r.stats) == 5.0);
}

TEST_CASE("autoregressive mode emits one token per forward") {
  const auto [target, draft] = reflective_pair(0.4);
  DecodeConfig c;
  c.mode = DecodeMode::kAutoregressive;
  c.max_new_tokens = 37;
  const auto r = decode(target, draft, prompt_for(2), c);
  CHECK(r.output.size() == 37);
  CHECK(r.stats.target_forwards == 37);
  CHECK(r.stats.draft_forwards == 0);
  CHECK(mean_accepted_tokens(r.stats) == 1.0);
}

TEST_CASE("alpha 0 reproduces plain speculative decoding") {
  const auto [target, draft] = reflective_pair(0.4);
  for (Strategy s : {Strategy::kExactMatch, Strategy::kSpeculativeSampling,
                     Strategy::kTypical}) {
    for (std::uint64_t i = 0; i < 5; ++i) {
      const auto prompt = prompt_for(i);
      const DecodeConfig reflect = reflect_config(s, 0.0, 100 + i);
      DecodeConfig plain = reflect;
      plain.reflective_template.reflective = false;

      const auto a = decode(target, draft, prompt, reflect);
      const auto b = decode(target, draft, prompt, plain);
      const auto ref = testing::reference_decode(
          target, draft, prompt, s, 5, 0.8, 40, 100 + i, reflect.typical);
      CHECK(format_trace(a) == format_trace(b));
      CHECK(format_trace(a) == format_trace(ref));
    }
  }
}

TEST_CASE("reflection raises acceptance on the reflection-aware backend") {
  const auto [target, draft] = reflective_pair(0.4);
  std::size_t out0 = 0, fwd0 = 0, out3 = 0, fwd3 = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto a =
        decode(target, draft, prompt_for(i),
               reflect_config(Strategy::kSpeculativeSampling, 0.0, i));
    const auto b =
        decode(target, draft, prompt_for(i),
               reflect_config(Strategy::kSpeculativeSampling, 0.3, i));
    out0 += a.stats.output_tokens;
    fwd0 += a.stats.target_forwards;
    out3 += b.stats.output_tokens;
    fwd3 += b.stats.target_forwards;
  }
  CHECK(static_cast<double>(out3) / fwd3 > static_cast<double>(out0) / fwd0);
}

TEST_CASE("every step's draft-segment logits equal a fresh replay") {
  const auto [target, draft] = reflective_pair(0.4);
  DecodeConfig c = reflect_config(Strategy::kSpeculativeSampling, 0.3, 9);
  c.check_causality = true;
  std::size_t steps = 0;
  std::size_t last_calls = 0;
  const auto observer = [&](const StepTrace& t) {
    ModelSession fresh(target);
    fresh.forward(t.committed_before);
    CHECK(fresh.last_logits() == t.logits->original[0]);
    for (std::size_t i = 0; i < t.draft->gamma(); ++i) {
      const Token next[] = {t.draft->tokens[i]};
      CHECK(fresh.forward(next).back() == t.logits->original[i + 1]);
    }
    // One target forward per step.
    CHECK(t.target_session->forward_calls() == last_calls + 1);
    last_calls = t.target_session->forward_calls();
    // Draft session sits at the committed prefix while the target holds the
    // full reflective input.
    CHECK(t.draft_session->tokens() == t.committed_before);
    CHECK(t.target_session->size() ==
          t.committed_before.size() + t.layout->full_sequence.size());
    ++steps;
  };
  const auto r = decode(target, draft, prompt_for(3), c, observer);
  CHECK(steps == r.stats.steps.size());
  CHECK(steps > 3);
}

TEST_CASE("manual step loop keeps the cache contract") {
  const auto [target, draft] = reflective_pair(0.4);
  ModelSession ts(target), ds(draft);
  TokenSeq committed = prompt_for(4);
  Rng rng(17);
  const ReflectiveTemplate tmpl{{kMarker}, 4, true};
  for (int step = 0; step < 50; ++step) {
    const std::size_t before = committed.size();
    const TokenSeq target_tokens = ts.tokens();
    const auto bundle = generate_draft(ds, committed, 4, 0.9, rng);
    CHECK(ts.tokens() == target_tokens);
    const auto layout = build_reflective_input(bundle, tmpl, committed);
    const auto logits = paired_forward(ts, committed, layout);

    ModelSession fresh(target);
    fresh.forward(committed);
    CHECK(fresh.last_logits() == logits.original[0]);

    const auto p = fuse(logits.original, logits.reflective, FusionConfig{0.3, 0.9});
    const auto result = verify_speculative_sampling(p, bundle.q_dists, bundle.tokens, rng);
    commit_and_prune(ts, ds, before, result);

    // Nothing of the probe, prefix replay or second copy survives.
    TokenSeq expect(committed);
    expect.insert(expect.end(), bundle.tokens.begin(),
                  bundle.tokens.begin() + static_cast<std::ptrdiff_t>(result.accepted_n));
    CHECK(ts.tokens() == expect);
    CHECK(ds.size() <= expect.size());
    CHECK(std::equal(ds.tokens().begin(), ds.tokens().end(), expect.begin()));
    if (result.accepted_n == 0) CHECK(ts.size() == before);

    committed = expect;
    committed.push_back(result.bonus);
  }
}

TEST_CASE("eos ends the output and totals add up") {
  const auto [target, draft] = reflective_pair(0.3);
  DecodeConfig c = reflect_config(Strategy::kTypical, 0.3, 5);
  c.max_new_tokens = 200;
  // Pick an eos that the unconstrained run actually produces mid-stream.
  const auto free_run = decode(target, draft, prompt_for(5), c);
  const Token eos = free_run.output[free_run.output.size() / 2];
  c.eos_token = eos;
  const auto r = decode(target, draft, prompt_for(5), c);
  REQUIRE(!r.output.empty());
  CHECK(r.output.back() == eos);
  CHECK(std::count(r.output.begin(), r.output.end(), eos) == 1);
  CHECK(std::equal(r.output.begin(), r.output.end(), free_run.output.begin()));

  std::size_t emitted = 0, committed = 0;
  for (const auto& s : r.stats.steps) {
    CHECK(s.tokens_emitted == s.accepted_n + 1);
    emitted += s.accepted_n + 1;
    committed += s.tokens_committed;
  }
  CHECK(r.stats.total_emitted == emitted);
  CHECK(r.stats.output_tokens == committed);
  CHECK(r.stats.output_tokens == r.output.size());
}

TEST_CASE("max_new_tokens truncates the final step") {
  const auto m = make_table_model(base_spec());
  DecodeConfig c;
  c.strategy = Strategy::kExactMatch;
  c.temperature = 0.0;
  c.gamma = 4;
  c.max_new_tokens = 12;
  const auto r = decode(m, m, prompt_for(1), c);
  CHECK(r.output.size() == 12);
  CHECK(r.stats.steps.back().tokens_committed == 2);
  CHECK(r.stats.total_emitted == 15);
}

TEST_CASE("decode rejects inconsistent setups") {
  const auto a = make_table_model(base_spec());
  ModelSpec other = base_spec();
  other.vocab_size = 16;
  const auto b = make_table_model(other);
  DecodeConfig c;
  CHECK_THROWS_AS(decode(a, b, TokenSeq{1}, c), Error);
  CHECK_THROWS_AS(decode(a, a, TokenSeq{}, c), Error);
  c.gamma = 0;
  CHECK_THROWS_AS(decode(a, a, TokenSeq{1}, c), Error);
  c.gamma = 3;
  c.alpha = -0.1;
  CHECK_THROWS_AS(decode(a, a, TokenSeq{1}, c), Error);
}

TEST_CASE("fused entropy source is selectable") {
  const auto [target, draft] = reflective_pair(0.4);
  DecodeConfig c = reflect_config(Strategy::kTypical, 0.3, 2);
  const auto original = decode(target, draft, prompt_for(6), c);
  c.entropy_source = EntropySource::kFused;
  const auto fused = decode(target, draft, prompt_for(6), c);
  CHECK(original.stats.steps.size() > 0);
  CHECK(fused.stats.steps.size() > 0);
  // At alpha 0 the two sources coincide.
  c.alpha = 0.0;
  const auto f0 = decode(target, draft, prompt_for(6), c);
  c.entropy_source = EntropySource::kOriginal;
  CHECK(format_trace(decode(target, draft, prompt_for(6), c)) == format_trace(f0));
}
