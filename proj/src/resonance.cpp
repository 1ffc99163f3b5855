// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "billiard/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "billiard/error.hpp"
#include "billiard/numfmt.hpp"

namespace billiard {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double rect_level(int k, int l, double L0, double B0) {
  return double(k * k) * kPiSq / (L0 * L0) + double(l * l) * kPiSq / (B0 * B0);
}

RectSpectrum rect_spectrum(double L0, double B0, double cap) {
  require(L0 > 0 && B0 > 0, ErrorKind::Parameter, "rectangle sides must be positive");
  RectSpectrum out;
  if (cap < rect_level(1, 1, L0, B0)) {
    out.warning = "cap " + fmt15(cap) + " lies below the ground level " + fmt15(rect_level(1, 1, L0, B0));
    return out;
  }
  for (int k = 1; rect_level(k, 1, L0, B0) <= cap; ++k)
    for (int l = 1; rect_level(k, l, L0, B0) <= cap; ++l) out.levels.push_back({rect_level(k, l, L0, B0), k, l});
  std::sort(out.levels.begin(), out.levels.end(), [](const LatticeLevel& a, const LatticeLevel& b) {
    if (a.value != b.value) return a.value < b.value;
    if (a.k != b.k) return a.k < b.k;
    return a.l < b.l;
  });
  return out;
}

Nu nu(double E, double L0, double B0) {
  require(E > 0, ErrorKind::Parameter, "nu needs E > 0");
  const double r = std::sqrt(2.0 * E) / kPi;
  const int kbox = int(std::ceil(L0 * r)) + 1;
  const int lbox = int(std::ceil(B0 * r)) + 1;
  Nu best{std::numeric_limits<double>::infinity(), 0, 0};
  for (int k = 1; k <= kbox; ++k)
    for (int l = 1; l <= lbox; ++l) {
      const double d = std::abs(E - rect_level(k, l, L0, B0));
      if (d < best.value) best = {d, k, l};
    }
  return best;
}

bool in_Z_eps(double E, double eps, double c0, double L0, double B0) {
  require(eps >= 0 && c0 > 0, ErrorKind::Parameter, "Z_eps needs eps >= 0 and c0 > 0");
  return nu(E, L0, B0).value >= c0 * std::pow(E, -eps);
}

SinBound sin_lower_bound(double E, int k, double beta, double B0, double L0, double floor) {
  SinBound out;
  out.k = k;
  out.z = E - double(k * k) * kPiSq / (L0 * L0);
  if (out.z < beta * beta) {
    fail(ErrorKind::Regime, "z_k = " + fmt15(out.z) + " < beta^2 = " + fmt15(beta * beta) +
                                " for k = " + std::to_string(k) + "; use the large-mode estimate");
  }
  const double n = nu(E, L0, B0).value;
  if (n == 0.0) {
    out.resonant = true;
    out.measured = std::nan("");
    return out;
  }
  const double rz = std::sqrt(out.z);
  out.measured = std::abs(std::sin(B0 * rz)) * rz / n;
  out.passed = out.measured >= floor;
  return out;
}

double step_ratio(double lambda, double alpha) {
  require(lambda > 0 && alpha > 0, ErrorKind::Parameter, "step_ratio needs lambda > 0 and alpha > 0");
  const double l = std::ceil(lambda / alpha - 0.5);
  return (lambda + l * alpha) / lambda;
}

double step_envelope(double lambda, double alpha, double M) {
  return lambda <= M ? 1.0 + (2.0 * M + 1.0) / alpha : 3.0;
}

double default_c0(const std::vector<double>& energies, double L0, double B0, double fraction) {
  require(!energies.empty(), ErrorKind::Parameter, "default c0 needs at least one energy");
  require(fraction > 0 && fraction <= 1, ErrorKind::Parameter, "fraction must lie in (0, 1]");
  std::vector<double> v;
  v.reserve(energies.size());
  for (double E : energies) v.push_back(nu(E, L0, B0).value);
  std::sort(v.begin(), v.end(), std::greater<>());
  const std::size_t need = std::size_t(std::ceil(fraction * double(v.size())));
  return v[std::max<std::size_t>(need, 1) - 1];
}

ResonanceReport resonance_report(double E, double L0, double B0, const std::vector<double>& eps_list,
                                 double c0, double beta) {
  ResonanceReport r;
  r.E = E;
  r.nu = nu(E, L0, B0);
  auto flag = [&](double eps) {
    return ZFlag{eps, c0, r.nu.value >= c0 * std::pow(E, -eps)};
  };
  r.z_flags.push_back(flag(0.0));
  for (double eps : eps_list)
    if (eps != 0.0) r.z_flags.push_back(flag(eps));
  for (int k = 1; E - double(k * k) * kPiSq / (L0 * L0) >= beta * beta; ++k)
    r.sin_bounds.push_back(sin_lower_bound(E, k, beta, B0, L0));
  return r;
}

std::string resonance_csv_header(const std::vector<double>& eps_list) {
  std::string h = "E,nu,argmin_k,argmin_l,z0_flag";
  for (double eps : eps_list)
    if (eps != 0.0) h += ",z_eps_" + fmt15(eps);
  return h;
}

std::string resonance_csv_row(const ResonanceReport& r) {
  std::string row = fmt15(r.E) + "," + fmt15(r.nu.value) + "," + std::to_string(r.nu.k) + "," +
                    std::to_string(r.nu.l);
  for (const auto& z : r.z_flags) row += z.in_set ? ",1" : ",0";
  return row;
}

}  // namespace billiard
