// Copyright 2026 The RefVerify Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace refverify {

enum class ErrorKind {
  kInvalidLogits,
  kInvalidConfig,
  kInvalidToken,
  kInvalidDistribution,
  kRange,
  kDegenerateResidual,
  kInternal,
  kIo,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace refverify
