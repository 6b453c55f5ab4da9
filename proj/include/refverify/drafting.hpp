// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "refverify/models.hpp"

namespace refverify {

struct DraftBundle {
  TokenSeq tokens;
  // q_dists[i] is the draft distribution tokens[i] was sampled from.
  std::vector<Distribution> q_dists;
  std::size_t draft_forward_count = 0;

  std::size_t gamma() const { return tokens.size(); }
};

// Brings `session` in line with `committed` (which must extend the session's
// tokens), then samples `gamma` tokens autoregressively. Temperature 0 draws
// from the greedy one-hot. The session is left holding exactly `committed`.
DraftBundle generate_draft(ModelSession& session,
                           std::span<const Token> committed, std::size_t gamma,
                           double temperature, Rng& rng);

// Feeds committed[session.size():] so the session mirrors `committed`.
// Returns the number of forward calls issued (0 or 1).
std::size_t sync_session(ModelSession& session,
                         std::span<const Token> committed);

}  // namespace refverify
