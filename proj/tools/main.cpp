// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "refverify/cli.hpp"

int main(int argc, char** argv) {
  return refverify::run_cli(argc, argv, std::cout, std::cerr);
}
