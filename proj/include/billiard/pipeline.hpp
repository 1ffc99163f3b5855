// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "billiard/discretize.hpp"
#include "billiard/geometry.hpp"

namespace billiard {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInsufficient = 3;

/// Flat run configuration. Text form: one `key = value` per line, `#`
/// starts a comment, blank lines are ignored, unknown keys are rejected.
///
///   profile.kind                 truncated-quarter-stadium | power-profile | constant-rectangle
///   profile.L0, profile.B0, profile.B1, profile.gamma, profile.c_L, profile.truncation_fraction
///   grid.ns, grid.nt
///   solver.residual_tol, solver.block_size, solver.max_restarts, solver.seed
///   certify                      true | false; solve the (ns/2, nt/2) grid for refine shifts
///   certify.tol                  relative shift accepted as grid-converged
///   window.lo, window.hi         E window [lo, hi)
///   eps                          comma-separated list; the first entry drives the bounds sweep
///   c0                           <= 0 selects the 30% quantile of nu
///   beta                         <= 0 selects pi / (2 B0)
///   M_large, M_small, b0, E0, kmax_extra, min_pairs
///   output.dir, cache.path       cache.path defaults to <output.dir>/eigenpairs.cache
///   jobs                         0 selects the number of hardware threads
///   onedim.samples, onedim.seed, forms.random_v, forms.seed
struct RunConfig {
  std::map<std::string, std::string> profile;
  int ns = 0;
  int nt = 0;
  SolverOptions solver;
  bool certify = true;
  double cert_tol = 0.005;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::vector<double> eps{0.0};
  double c0 = 0.0;
  double beta = 0.0;
  double M_large = 1.0;
  double M_small = 1.0;
  double b0 = 0.0;
  double E0 = 0.0;
  int kmax_extra = 20;
  int min_pairs = 20;
  std::string out_dir = "out";
  std::string cache_path;
  int jobs = 0;
  int onedim_samples = 50;
  std::uint64_t onedim_seed = 20240611;
  int forms_random_v = 100;
  std::uint64_t forms_seed = 20240611;

  BilliardProfile build_profile() const;
  std::string resolved_cache_path() const;
  int resolved_jobs() const;
};

/// Throws Error(Format) naming `source:line` on malformed lines, unknown keys
/// or bad values.
RunConfig parse_config(std::string_view text, const std::string& source = "config");
RunConfig load_config(const std::string& path);
/// Sets one key; the same rules as a config line.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

struct CommandResult {
  int exit_code = kExitPass;
  std::string text;                 // human-readable report
  std::vector<std::string> files;   // outputs written, in order
};

/// Geometry validation; writes validate.json.
CommandResult cmd_validate(const RunConfig& config);
/// Solves the missing parts of the window, extends the cache and writes
/// spectrum.csv for the window.
CommandResult cmd_spectrum(const RunConfig& config);
/// which = onedim | forms | bounds.
CommandResult cmd_verify(const RunConfig& config, std::string_view which);
/// spectrum, then the bounds suite, then resonance.csv.
CommandResult cmd_sweep(const RunConfig& config);

}  // namespace billiard
