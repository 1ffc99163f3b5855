// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "billiard/error.hpp"

namespace billiard {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Regime: return "regime";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::EmptyRegion: return "empty-region";
    case ErrorKind::NotASolution: return "not-a-solution";
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace billiard
