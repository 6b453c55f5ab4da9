// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include "refverify/bench.hpp"

namespace refverify {

double mean_accepted_tokens(const RunStats& stats) {
  if (stats.steps.empty() || stats.target_forwards == 0) {
    throw Error(ErrorKind::kInvalidConfig, "#MAT of an empty run");
  }
  return static_cast<double>(stats.output_tokens) /
         static_cast<double>(stats.target_forwards);
}

std::size_t input_budget(const ReflectiveLayout& layout) {
  if (!layout.reflective) return layout.gamma;
  return 2 * layout.gamma + layout.prompt_len + layout.prefix_len;
}

}  // namespace refverify
