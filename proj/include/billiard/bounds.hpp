// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/rational.hpp>
#include <string>
#include <vector>

#include "billiard/adiabatic.hpp"
#include "billiard/discretize.hpp"

namespace billiard {

using Rational = boost::rational<long long>;

/// Nearest fraction with denominator <= 64; exact for the usual 3/2, 2, 3, 1/16.
Rational to_rational(double v);
std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// 1 / (2 gamma - 1). gamma >= 3/2.
Rational alpha_large(const Rational& gamma);
/// max((3 + 2 eps) / (2 gamma + 1), (2 + 2 eps) / (2 gamma - 1)). gamma >= 3/2, eps >= 0.
Rational alpha_small(const Rational& gamma, const Rational& eps);
/// max((2 + gamma + 2 (gamma + 1) eps) / (2 gamma + 1), (1 + 2 gamma + 4 gamma eps) / (4 gamma - 2)),
/// cross-checked against (1 + 2 eps + alpha_small) / 2 (Internal error on mismatch).
Rational rho(const Rational& gamma, const Rational& eps);

/// b = M E^{-alpha} for both mode families, before snapping.
struct BChoice {
  double b_large = 0.0;
  double b_small = 0.0;
};
BChoice choose_b(double E, const Rational& gamma, const Rational& eps, double M_large, double M_small);

/// b snapped to the nearest s-grid line. Resolution error when it lands on
/// s = 0, Parameter error when b >= b0.
struct SnappedB {
  double requested = 0.0;
  double value = 0.0;
  double error = 0.0;
  int index = 0;
};
SnappedB snap_b(const TensorGrid& grid, double b, double b0);

/// Median of pairwise slopes; pairs with equal x are skipped. NaN for < 2 points.
double theil_sen_slope(const std::vector<double>& x, const std::vector<double>& y);

/// One per-mode control estimate: lhs <= C * rhs, constant = lhs / rhs.
struct ModeConstant {
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;
};

/// ||u_+||^2_{L2(R)} against
///   b^{2g-1} ||d_x u||^2_{W_b} + E^{-1} b^{2g-3} ||d_y u||^2_{W_b} + b^{-1} ||u||^2_{W_b},
/// plus the per-mode estimates
///   ||u_k||_{(-B0,b)} <= C (b^{g-1/2} ||F_k|| + E^{-1/2} b^{g-3/2} ||G_k|| + b^{-1/2} ||u_k||_{(0,b)}).
struct LargeModeReport {
  bool empty = true;  // no large modes up to kmax
  double b = 0.0;
  double lhs = 0.0;
  double term_dx = 0.0;
  double term_dy = 0.0;
  double term_u = 0.0;
  double constant = 0.0;
  std::vector<ModeConstant> modes;
  double max_mode_constant = 0.0;
};
LargeModeReport check_large_modes(const TensorGrid& grid, const EigenPair& pair, const ModeDecomposition& decomp,
                                  const FGData& fg, const ModeSplit& split, double b);

/// ||u_-||^2_{L2(R)} against
///   E / nu^2 [E b^{2g+1} ||d_x u||^2_W + b^{2g-1} ||d_y u||^2_W + (1 + E b^{g+2})^2 b^{-1} ||u||^2_W],
/// plus the per-mode estimates
///   ||u_k||_{(-B0,b)} <= C E^{1/2}/nu [E^{1/2} b^{g+1/2} ||F_k|| + b^{g-1/2} ||G_k||
///                                      + (1 + E b^{g+2}) b^{-1/2} ||u_k||_{(0,b)}].
struct SmallModeReport {
  bool applicable = false;  // E in Z_eps
  bool resonant = false;    // nu(E) = 0
  double b = 0.0;
  double nu = 0.0;
  double prefactor = 0.0;   // E / nu^2
  double lhs = 0.0;
  double term_dx = 0.0;     // without the prefactor
  double term_dy = 0.0;
  double term_u = 0.0;
  double growth = 0.0;      // (1 + E b^{g+2})^2
  double constant = 0.0;
  std::vector<ModeConstant> modes;
  double max_mode_constant = 0.0;
};
SmallModeReport check_small_modes(const TensorGrid& grid, const EigenPair& pair, const ModeDecomposition& decomp,
                                  const FGData& fg, const ModeSplit& split, double b, double eps, double c0);

struct BoundConfig {
  Rational eps{0};
  Rational gamma{0};       // 0 takes the profile's gamma
  double c0 = 0.0;         // <= 0 selects the 30% quantile of nu over the certified pairs
  double M_large = 1.0;
  double M_small = 1.0;
  double b0 = 0.0;         // <= 0 selects B1 / 4
  double E0 = 0.0;         // <= 0 selects the lowest certified E
  double cert_tol = 0.005; // relative eigenvalue shift under refinement
  int kmax_extra = 20;     // kmax = k* + kmax_extra
  int min_pairs = 20;
  int jobs = 1;            // threads for the per-pair checks; output order is fixed
};

struct BoundRow {
  long index = -1;
  double E = 0.0;
  double nu = 0.0;
  int nu_k = 0, nu_l = 0;
  bool in_Z = false;       // Z_eps
  bool in_Z0 = false;
  bool certified = false;
  double refine_shift = -1.0;
  double norm_W = 0.0;     // squared norms
  double norm_R = 0.0;
  double norm_Omega = 0.0;
  double ratio = 0.0;      // ||u||_Omega / ||u||_W
  double E_rho = 0.0;
  double bhw = 0.0;        // ratio / E
  SnappedB b_large;
  SnappedB b_small;
  double minus_R = 0.0;    // ||u_-||^2_R
  double plus_R = 0.0;     // ||u_+||^2_R
  double tail_R = 0.0;     // ||u - u_- - u_+||^2_R
  LargeModeReport large;
  SmallModeReport small;
};

struct BoundReport {
  BoundConfig config;
  Rational rho{0};
  Rational alpha_large{0};
  Rational alpha_small{0};
  double c0 = 0.0;
  double E0 = 0.0;
  double b0 = 0.0;
  std::vector<BoundRow> rows;  // every pair with E >= E0, ascending E
  int certified = 0;
  int in_Z = 0;
  int used = 0;                // certified and in Z_eps
  bool insufficient = false;   // used < min_pairs
  double C_fit = 0.0;          // max ratio / E^rho over the lower half of the used pairs
  double validation = 0.0;     // max ratio / (C_fit E^rho) over the upper half
  double ratio_slope = 0.0;    // Theil-Sen slope of log ratio vs log E over the used pairs
  double large_slope = 0.0;    // Theil-Sen slope of log C_+ vs log E over certified pairs
  double small_slope = 0.0;    // Theil-Sen slope of log C_- vs log E over the used pairs
  double large_mode_slope = 0.0;  // same for the largest per-mode constant
  double small_mode_slope = 0.0;
  double max_ratio_used = 0.0;
  double max_ratio_excluded = 0.0;  // certified pairs outside Z_eps
};

/// Pairs must carry refine_shift (certification) and their global index.
BoundReport theorem_sweep(const TensorGrid& grid, const std::vector<EigenPair>& pairs, const BoundConfig& config);

std::string bound_csv(const BoundReport& report);
std::string bound_summary_json(const BoundReport& report);

}  // namespace billiard
