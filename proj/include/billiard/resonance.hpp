// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace billiard {

/// pi^2 as a double. Lattice levels are always formed as
/// (k*k) * kPiSq / (L0*L0) + (l*l) * kPiSq / (B0*B0).
inline constexpr double kPiSq = 3.14159265358979323846 * 3.14159265358979323846;

double rect_level(int k, int l, double L0, double B0);

struct LatticeLevel {
  double value = 0.0;
  int k = 0;
  int l = 0;
};

/// Dirichlet spectrum of the rectangle [-B0, 0] x [0, L0] up to cap, sorted
/// (ties by k, then l), with multiplicity.
struct RectSpectrum {
  std::vector<LatticeLevel> levels;
  std::string warning;  // set when cap lies below the ground level
};
RectSpectrum rect_spectrum(double L0, double B0, double cap);

/// nu(E) = min |E - level| over the lattice. The minimum is taken over the
/// box k <= ceil(L0 sqrt(2E)/pi) + 1, l <= ceil(B0 sqrt(2E)/pi) + 1; levels
/// are increasing in k and l, so nothing outside the box comes closer.
struct Nu {
  double value = 0.0;
  int k = 0;
  int l = 0;
};
Nu nu(double E, double L0, double B0);

/// nu(E) >= c0 E^{-eps}; equality counts as inside.
bool in_Z_eps(double E, double eps, double c0, double L0, double B0);

/// Achieved constant |sin(B0 sqrt(z_k))| sqrt(z_k) / nu(E) for
/// z_k = E - k^2 pi^2 / L0^2 >= beta^2.
struct SinBound {
  int k = 0;
  double z = 0.0;
  double measured = 0.0;       // NaN when resonant
  bool resonant = false;       // nu(E) = 0: excluded, no constant
  bool passed = false;         // measured >= floor
};
SinBound sin_lower_bound(double E, int k, double beta, double B0, double L0, double floor = 0.0);

/// f(lambda) = (lambda + l(lambda) alpha) / lambda with l the index of the
/// nearest multiple of alpha; half-way ties go to the smaller l.
double step_ratio(double lambda, double alpha);
/// 1 + (2M + 1)/alpha for lambda <= M, else 3 (covers the limit 2).
double step_envelope(double lambda, double alpha, double M);

/// Largest c0 such that at least `fraction` of the energies have nu >= c0.
double default_c0(const std::vector<double>& energies, double L0, double B0, double fraction = 0.3);

struct ZFlag {
  double eps = 0.0;
  double c0 = 0.0;
  bool in_set = false;
};

struct ResonanceReport {
  double E = 0.0;
  Nu nu;
  std::vector<ZFlag> z_flags;
  std::vector<SinBound> sin_bounds;  // every k with z_k >= beta^2
};

ResonanceReport resonance_report(double E, double L0, double B0, const std::vector<double>& eps_list,
                                 double c0, double beta);

/// CSV header and row: E,nu,argmin_k,argmin_l,z0_flag,z_eps_<eps>...
std::string resonance_csv_header(const std::vector<double>& eps_list);
std::string resonance_csv_row(const ResonanceReport& report);

}  // namespace billiard
