// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "refverify/drafting.hpp"

using namespace refverify;

namespace {

ModelPtr draft_model() {
  ModelSpec s;
  s.vocab_size = 24;
  s.seed = 5;
  s.order = 2;
  return make_table_model(s);
}

}  // namespace

TEST_CASE("greedy drafts are reproducible") {
  const auto m = draft_model();
  const TokenSeq committed{1, 2, 3};
  ModelSession s1(m), s2(m);
  Rng r1(1), r2(999);
  const auto a = generate_draft(s1, committed, 6, 0.0, r1);
  const auto b = generate_draft(s2, committed, 6, 0.0, r2);
  CHECK(a.tokens == b.tokens);
  CHECK(a.q_dists == b.q_dists);
}

TEST_CASE("gamma 1 drafts one token") {
  ModelSession s(draft_model());
  Rng rng(2);
  const auto d = generate_draft(s, TokenSeq{4, 5}, 1, 1.0, rng);
  CHECK(d.tokens.size() == 1);
  CHECK(d.q_dists.size() == 1);
  CHECK(d.draft_forward_count == 1);
}

TEST_CASE("gamma 0 is rejected") {
  ModelSession s(draft_model());
  Rng rng(2);
  CHECK_THROWS_AS(generate_draft(s, TokenSeq{1}, 0, 1.0, rng), Error);
}

TEST_CASE("draft tokens replay from the rng and q_dists") {
  const auto m = draft_model();
  const TokenSeq committed{7, 7, 1, 0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ModelSession s(m);
    Rng rng(seed);
    Rng replay = rng;
    const auto d = generate_draft(s, committed, 5, 0.9, rng);
    for (std::size_t i = 0; i < d.gamma(); ++i) {
      CHECK(sample(d.q_dists[i], replay) == d.tokens[i]);
      CHECK(d.q_dists[i].prob(d.tokens[i]) > 0.0);
    }
  }
}

TEST_CASE("q_dists match independent recomputation") {
  const auto m = draft_model();
  const TokenSeq committed{3, 9, 11};
  ModelSession s(m);
  Rng rng(4);
  const auto d = generate_draft(s, committed, 5, 0.7, rng);
  TokenSeq ctx = committed;
  for (std::size_t i = 0; i < d.gamma(); ++i) {
    CHECK(softmax(m->next_logits(ctx), 0.7) == d.q_dists[i]);
    ctx.push_back(d.tokens[i]);
  }
}

TEST_CASE("draft session is left at the committed prefix") {
  const auto m = draft_model();
  ModelSession s(m);
  s.forward(TokenSeq{1, 2});
  Rng rng(5);
  const TokenSeq committed{1, 2, 6, 8};
  const auto d = generate_draft(s, committed, 4, 1.0, rng);
  CHECK(s.tokens() == committed);
  // One forward to catch up on {6, 8}, three for draft tokens 1..3.
  CHECK(d.draft_forward_count == 4);

  ModelSession diverged(m);
  diverged.forward(TokenSeq{5});
  CHECK_THROWS_AS(generate_draft(diverged, committed, 2, 1.0, rng), Error);
}
