// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace billiard {

enum class ErrorKind {
  Parameter,
  Regime,
  Convergence,
  Degenerate,
  Resolution,
  Precondition,
  EmptyRegion,
  NotASolution,
  Io,
  Format,
  Internal,
};

const char* to_string(ErrorKind kind) noexcept;

/// Exception type thrown by every module. The kind maps one-to-one onto the
/// status codes of the C API.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Convergence failure; carries the best residual reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(ErrorKind::Convergence, what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace billiard
