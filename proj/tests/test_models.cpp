// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>

#include "refverify/models.hpp"
#include "refverify/vocabulary.hpp"

using namespace refverify;

namespace {

ModelSpec table_spec(std::uint64_t seed = 42, std::size_t vocab = 16,
                     std::size_t order = 2) {
  ModelSpec s;
  s.vocab_size = vocab;
  s.seed = seed;
  s.order = order;
  return s;
}

TokenSeq random_tokens(Rng& rng, std::size_t n, std::size_t vocab) {
  TokenSeq out(n);
  for (auto& t : out) t = static_cast<Token>(rng.next_u64() % vocab);
  return out;
}

double max_diff(const LogitVector& a, const LogitVector& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::vector<ModelPtr> all_backends() {
  const ModelSpec spec = table_spec(7, 12, 3);
  const ModelPtr table = make_table_model(spec);
  Rng rng(1);
  std::vector<TokenSeq> docs{random_tokens(rng, 200, 12),
                             random_tokens(rng, 150, 12)};
  const ModelPtr ngram = make_ngram_model(docs, 12, 2, 0.5);
  const ModelPtr draft = make_divergence_pair(spec, 0.4).second;
  const ModelPtr reflect = make_reflection_aware(table, 11, 0.5);
  return {table, ngram, draft, reflect};
}

}  // namespace

TEST_CASE("table model is a pure function of spec and context") {
  const auto a = make_table_model(table_spec());
  const auto b = make_table_model(table_spec());
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto ctx = random_tokens(rng, 1 + i % 9, 16);
    CHECK(a->next_logits(ctx) == a->next_logits(ctx));
    CHECK(a->next_logits(ctx) == b->next_logits(ctx));
  }
}

TEST_CASE("table models with different seeds differ") {
  const auto a = make_table_model(table_spec(1));
  const auto b = make_table_model(table_spec(2));
  Rng rng(4);
  int differing = 0;
  for (int i = 0; i < 100; ++i) {
    const auto ctx = random_tokens(rng, 1 + i % 5, 16);
    differing += a->next_logits(ctx) != b->next_logits(ctx);
  }
  CHECK(differing > 0);
}

TEST_CASE("table logits stay in the declared range") {
  const auto m = make_table_model(table_spec());
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto l = m->next_logits(random_tokens(rng, 1 + i % 6, 16));
    for (double v : l.values()) {
      REQUIRE(v >= -4.0);
      REQUIRE(v <= 4.0);
    }
  }
}

TEST_CASE("table model conditions only on the trailing order tokens") {
  const auto m = make_table_model(table_spec(9, 16, 2));
  const TokenSeq a{1, 2, 3, 4, 5};
  const TokenSeq b{9, 9, 9, 4, 5};
  CHECK(m->next_logits(a) == m->next_logits(b));
}

TEST_CASE("incremental forwards equal one combined forward") {
  Rng rng(6);
  for (const auto& model : all_backends()) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = random_tokens(rng, 1 + trial, 12);
      const auto b = random_tokens(rng, 1 + (trial * 3) % 7, 12);
      TokenSeq ab = a;
      ab.insert(ab.end(), b.begin(), b.end());

      ModelSession whole(model);
      const auto combined = whole.forward(ab);
      ModelSession split(model);
      auto first = split.forward(a);
      const auto second = split.forward(b);
      first.insert(first.end(), second.begin(), second.end());
      REQUIRE(first.size() == combined.size());
      for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(max_diff(first[i], combined[i]) <= 1e-12);
      }
      CHECK(split.cached_length() == split.size());
    }
  }
}

TEST_CASE("logits at a position ignore later tokens") {
  Rng rng(7);
  for (const auto& model : all_backends()) {
    for (int trial = 0; trial < 20; ++trial) {
      auto seq = random_tokens(rng, 12, 12);
      ModelSession s1(model);
      const auto before = s1.forward(seq);
      const std::size_t j = rng.next_u64() % 11;
      for (std::size_t k = j + 1; k < seq.size(); ++k) {
        seq[k] = static_cast<Token>(rng.next_u64() % 12);
      }
      ModelSession s2(model);
      const auto after = s2.forward(seq);
      for (std::size_t k = 0; k <= j; ++k) CHECK(before[k] == after[k]);
    }
  }
}

TEST_CASE("session forward rejects bad tokens and empty input") {
  ModelSession s(make_table_model(table_spec()));
  const TokenSeq bad{3, 16};
  try {
    s.forward(bad);
    FAIL("expected invalid-token");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidToken);
  }
  CHECK(s.size() == 0);
  CHECK_THROWS_AS(s.forward(TokenSeq{}), Error);
}

TEST_CASE("truncate") {
  const auto model = make_table_model(table_spec());
  ModelSession s(model);
  s.forward(TokenSeq{1, 2, 3});

  SUBCASE("to current length is a no-op") {
    const auto before = s.last_logits();
    s.truncate(3);
    CHECK(s.size() == 3);
    CHECK(s.last_logits() == before);
  }
  SUBCASE("then append matches a fresh session") {
    s.truncate(1);
    const auto got = s.forward(TokenSeq{7});
    ModelSession fresh(model);
    const auto want = fresh.forward(TokenSeq{1, 7});
    CHECK(max_diff(got.back(), want.back()) <= 1e-12);
    CHECK(s.tokens() == TokenSeq{1, 7});
  }
  SUBCASE("to zero") {
    s.truncate(0);
    CHECK(s.size() == 0);
    CHECK(s.cached_length() == 0);
    CHECK_THROWS_AS(s.last_logits(), Error);
  }
  SUBCASE("past the end is a range error") {
    try {
      s.truncate(4);
      FAIL("expected range error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kRange);
    }
  }
}

TEST_CASE("ngram hand counts") {
  Vocabulary vocab;
  SUBCASE("a b a b, order 2: b follows a") {
    const auto doc = vocab.encode_adding("a b a b");
    const auto m = make_ngram_model({doc}, 2, 2, 1.0);
    const TokenSeq ctx{*vocab.find("a")};
    CHECK(greedy(softmax(m->next_logits(ctx), 1.0)) == *vocab.find("b"));
  }
  SUBCASE("a a a, order 1") {
    const auto doc = vocab.encode_adding("a a a");
    const std::size_t v = 5;
    for (double lambda : {0.5, 1.0, 2.0}) {
      const auto m = make_ngram_model({doc}, v, 1, lambda);
      const auto d = softmax(m->next_logits(doc), 1.0);
      const double want = (2.0 + lambda) / (2.0 + lambda * v);
      CHECK(std::abs(d[0] - want) < 1e-12);
      double sum = 0.0;
      for (double p : d.probs()) sum += p;
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
  SUBCASE("unseen context is uniform") {
    const auto m = make_ngram_model({TokenSeq{0, 1, 0, 1}}, 4, 1, 1.0);
    const auto d = softmax(m->next_logits(TokenSeq{3}), 1.0);
    for (double p : d.probs()) CHECK(p == doctest::Approx(0.25));
  }
  SUBCASE("documents do not share counts") {
    // "x y" and "z x": no "y z" transition exists.
    const auto d1 = vocab.encode_adding("x y");
    const auto d2 = vocab.encode_adding("z x");
    const auto m = make_ngram_model({d1, d2}, 3, 1, 1.0);
    const auto d = softmax(m->next_logits(TokenSeq{*vocab.find("y")}), 1.0);
    CHECK(d[0] == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("bad config") {
    CHECK_THROWS_AS(make_ngram_model({TokenSeq{0, 1}}, 2, 1, 0.0), Error);
    CHECK_THROWS_AS(make_ngram_model({TokenSeq{}}, 2, 1, 1.0), Error);
  }
}

TEST_CASE("divergence pair") {
  const ModelSpec spec = table_spec(13, 10, 2);
  Rng rng(8);
  SUBCASE("eta 0 gives the target distribution") {
    const auto [target, draft] = make_divergence_pair(spec, 0.0);
    for (int i = 0; i < 100; ++i) {
      const auto ctx = random_tokens(rng, 1 + i % 6, 10);
      CHECK(softmax(target->next_logits(ctx), 0.8) ==
            softmax(draft->next_logits(ctx), 0.8));
    }
  }
  SUBCASE("eta 1 ignores the target") {
    ModelSpec noise = spec;
    noise.seed = 999;
    const auto base = make_table_model(spec);
    const auto [target, draft] = make_divergence_pair(base, noise, 1.0);
    const auto independent = make_table_model(noise);
    for (int i = 0; i < 100; ++i) {
      const auto ctx = random_tokens(rng, 1 + i % 6, 10);
      CHECK(draft->next_logits(ctx) == independent->next_logits(ctx));
    }
  }
  SUBCASE("eta outside [0, 1]") {
    CHECK_THROWS_AS(make_divergence_pair(spec, 1.5), Error);
  }
}

TEST_CASE("reflection-aware wrapper") {
  const std::size_t v = 20;
  const Token marker = 19;
  const auto base = make_table_model(table_spec(21, v, 2));

  SUBCASE("beta 0 is the base model") {
    const auto m = make_reflection_aware(base, marker, 0.0);
    const TokenSeq ctx{1, 2, 3, 4, 5, marker, 2, 3};
    CHECK(m->next_logits(ctx) == base->next_logits(ctx));
  }
  SUBCASE("no marker is the base model") {
    const auto m = make_reflection_aware(base, marker, 0.7);
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
      auto ctx = random_tokens(rng, 1 + i % 10, v - 1);
      CHECK(m->next_logits(ctx) == base->next_logits(ctx));
    }
  }
  SUBCASE("beta 1 re-emits the draft after the marker") {
    const auto m = make_reflection_aware(base, marker, 1.0);
    const TokenSeq committed{3, 8, 1, 6};
    const TokenSeq draft{10, 4, 15, 2};
    const std::size_t prefix = 2;
    TokenSeq ctx = committed;
    ctx.insert(ctx.end(), draft.begin(), draft.end());
    ctx.push_back(marker);
    ctx.insert(ctx.end(), committed.end() - prefix, committed.end());
    for (std::size_t i = 0; i < draft.size(); ++i) {
      CHECK(greedy(m->next_logits(ctx)) == draft[i]);
      CHECK(reflection_copy_target(ctx, marker) == draft[i]);
      ctx.push_back(draft[i]);
    }
    // After the full second copy the mirrored successor is the marker
    // itself, so nothing is copied.
    CHECK(reflection_copy_target(ctx, marker) == -1);
  }
  SUBCASE("marker outside the vocabulary") {
    CHECK_THROWS_AS(make_reflection_aware(base, 20, 0.5), Error);
    CHECK_THROWS_AS(make_reflection_aware(base, 3, 1.5), Error);
  }
}

TEST_CASE("vocabulary") {
  Vocabulary v;
  CHECK(v.encode_adding("the cat  the\tdog\n") == TokenSeq{0, 1, 0, 2});
  CHECK(v.decode(TokenSeq{2, 1}) == "dog cat");
  CHECK_THROWS_AS(v.encode("bird"), Error);
  CHECK(parse_raw_tokens(" 1 2  3 ", 4) == TokenSeq{1, 2, 3});
  CHECK_THROWS_AS(parse_raw_tokens("1 4", 4), Error);
  CHECK_THROWS_AS(parse_raw_tokens("1 x", 4), Error);
}
