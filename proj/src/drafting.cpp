// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include "refverify/drafting.hpp"

#include <algorithm>
#include <string>

namespace refverify {

std::size_t sync_session(ModelSession& session,
                         std::span<const Token> committed) {
  const auto& held = session.tokens();
  if (held.size() > committed.size() ||
      !std::equal(held.begin(), held.end(), committed.begin())) {
    throw Error(ErrorKind::kInternal,
                "session is not a prefix of the committed tokens");
  }
  if (held.size() == committed.size()) return 0;
  session.forward(committed.subspan(held.size()));
  return 1;
}

DraftBundle generate_draft(ModelSession& session,
                           std::span<const Token> committed, std::size_t gamma,
                           double temperature, Rng& rng) {
  if (gamma == 0) throw Error(ErrorKind::kInvalidConfig, "gamma must be >= 1");
  if (committed.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "draft needs a non-empty prefix");
  }
  DraftBundle bundle;
  bundle.tokens.reserve(gamma);
  bundle.q_dists.reserve(gamma);
  bundle.draft_forward_count = sync_session(session, committed);

  LogitVector logits = session.last_logits();
  for (std::size_t i = 0; i < gamma; ++i) {
    Distribution q = to_distribution(logits, temperature);
    const Token x = sample(q, rng);
    bundle.tokens.push_back(x);
    bundle.q_dists.push_back(std::move(q));
    if (i + 1 < gamma) {
      const Token fed[] = {x};
      logits = session.forward(fed).back();
      ++bundle.draft_forward_count;
    }
  }
  session.truncate(committed.size());
  return bundle;
}

}  // namespace refverify
