// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "billiard/discretize.hpp"

namespace billiard {

/// Eigenpair cache, format version 1.
///
///   billiard-eigencache 1
///   profile.<key>=<value>          one line per profile record entry
///   ns=<int>
///   nt=<int>
///   residual_tol=<%.17g>
///   window=<lo>,<hi>               one line per solved window [lo, hi)
///   pairs=<count>
///   dofs=<count>
///   end-header
/// then per pair, in ascending E:
///   pair index=<int> E=<%.17g> residual=<%.17g> refine_shift=<%.17g> unresolved=<0|1>
///   <dofs little-endian float64 values>
/// and finally
///   crc32=<8 lowercase hex digits>
/// where the checksum covers every byte before the "crc32=" line.
struct EigenCache {
  static constexpr int kFormatVersion = 1;

  std::map<std::string, std::string> profile;
  int ns = 0;
  int nt = 0;
  double residual_tol = 0.0;
  std::vector<std::pair<double, double>> windows;
  std::vector<EigenPair> pairs;

  /// Parts of [lo, hi) not covered by the solved windows.
  std::vector<std::pair<double, double>> missing(double lo, double hi) const;
  /// Adds pairs (deduplicated by global index) and records the window.
  void merge(double lo, double hi, std::vector<EigenPair> solved);
  /// Pairs with E in [lo, hi).
  std::vector<const EigenPair*> in_window(double lo, double hi) const;
};

void write_cache(const std::string& path, const EigenCache& cache);
EigenCache read_cache(const std::string& path);

}  // namespace billiard
