// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "refverify/tokenspace.hpp"

namespace refverify {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Random distribution over `vocab_size` tokens; roughly one entry in four is
// zeroed (never all of them) so supports differ between draws.
Distribution random_distribution(std::size_t vocab_size, Rng& rng);

// Enumeration oracles for the verification kernels: unbiasedness of the
// rejection step, residual examples, typical-threshold law, and a seeded
// Monte-Carlo check of the sampler itself. Prints one line per check.
std::vector<SelftestCheck> run_selftest(std::ostream& out);

}  // namespace refverify
