// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace refverify {

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace refverify
