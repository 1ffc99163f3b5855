// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "billiard/error.hpp"
#include "billiard/resonance.hpp"

using namespace billiard;

constexpr double kPi = std::numbers::pi;

TEST_CASE("rectangle spectrum") {
  const auto s = rect_spectrum(kPi, kPi, 11.0);
  REQUIRE(s.levels.size() == 6);
  const double want[] = {2, 5, 5, 8, 10, 10};
  for (int i = 0; i < 6; ++i) CHECK(s.levels[i].value == doctest::Approx(want[i]).epsilon(1e-12));
  CHECK(s.levels[1].k == 1);
  CHECK(s.levels[1].l == 2);
  CHECK(s.levels[2].k == 2);
  CHECK(s.levels[2].l == 1);
  CHECK(s.warning.empty());

  const auto unit = rect_spectrum(1.0, 1.0, 25.0);
  REQUIRE(unit.levels.size() == 1);
  CHECK(unit.levels[0].value == doctest::Approx(2 * kPiSq));

  const auto empty = rect_spectrum(kPi, kPi, 1.0);
  CHECK(empty.levels.empty());
  CHECK_FALSE(empty.warning.empty());
}

TEST_CASE("nu") {
  const auto n = nu(3.7, kPi, kPi);
  CHECK(n.value == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(n.k * n.k + n.l * n.l == 5);
  CHECK(nu(rect_level(3, 4, 1.0, 2.0), 1.0, 2.0).value == 0.0);
  CHECK_THROWS_AS((void)nu(-1.0, 1.0, 1.0), Error);
}

TEST_CASE("nu agrees with a brute-force lattice search") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> energy(1.0, 3000.0), side(0.3, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double E = energy(rng), L0 = side(rng), B0 = side(rng);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 60; ++k)
      for (int l = 1; l <= 60; ++l) best = std::min(best, std::abs(E - rect_level(k, l, L0, B0)));
    const auto n = nu(E, L0, B0);
    CHECK(n.value == best);
    CHECK(std::abs(E - rect_level(n.k, n.l, L0, B0)) == n.value);
    CHECK(n.value >= 0.0);
  }
}

TEST_CASE("Z_eps membership") {
  CHECK(in_Z_eps(3.7, 0.0, 1.0, kPi, kPi));
  CHECK_FALSE(in_Z_eps(2.1, 0.0, 1.0, kPi, kPi));
  const double v = nu(100.0, kPi, kPi).value;
  CHECK(in_Z_eps(100.0, 0.5, 1.0, kPi, kPi) == (v >= 0.1));
  // ties count as inside
  CHECK(in_Z_eps(3.7, 0.0, nu(3.7, kPi, kPi).value, kPi, kPi));
  CHECK_THROWS_AS((void)in_Z_eps(3.7, -0.1, 1.0, kPi, kPi), Error);
}

TEST_CASE("sin lower bound") {
  // B0 = pi and z = 2.25: |sin(1.5 pi)| = 1.
  const double E = 2.25 + kPiSq / (kPi * kPi);
  const auto sb = sin_lower_bound(E, 1, 0.5, kPi, kPi);
  CHECK(sb.z == doctest::Approx(2.25).epsilon(1e-12));
  CHECK(sb.measured == doctest::Approx(1.5 / nu(E, kPi, kPi).value).epsilon(1e-9));
  CHECK_THROWS_AS((void)sin_lower_bound(E, 1, 2.0, kPi, kPi), Error);

  // E on the lattice: resonant, no constant.
  const double Er = rect_level(2, 3, 1.0, 1.0);
  const auto res = sin_lower_bound(Er, 2, 0.5, 1.0, 1.0);
  CHECK(res.resonant);
  CHECK(std::isnan(res.measured));

  double lowest = std::numeric_limits<double>::infinity();
  for (double e = 50.0; e <= 2000.0; e += 0.37) {
    if (nu(e, 1.0, 1.0).value < 1e-9) continue;
    for (int k = 1; k * k * kPiSq <= e - 0.25; ++k) {
      const auto r = sin_lower_bound(e, k, 0.5, 1.0, 1.0);
      if (r.z < 0.25) continue;
      lowest = std::min(lowest, r.measured);
    }
  }
  CHECK(lowest > 0.0);
}

TEST_CASE("step ratio") {
  CHECK(step_ratio(1.0, kPi) == 1.0);
  CHECK(step_ratio(kPi / 2, kPi) == 1.0);
  CHECK(step_ratio(3 * kPi / 4, kPi) == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
  CHECK(step_ratio(1000.3 * kPi, kPi) == doctest::Approx(2.0).epsilon(0.01));
  for (double lam = 100 * kPi; lam < 200 * kPi; lam += 0.731) {
    CHECK(step_ratio(lam, kPi) <= 2.01);
    CHECK(step_ratio(lam, kPi) >= 1.99);
  }
  for (double lam = 0.05; lam < 30; lam += 0.05) CHECK(step_ratio(lam, kPi) <= step_envelope(lam, kPi, 30));
  CHECK_THROWS_AS((void)step_ratio(0.0, kPi), Error);
}

TEST_CASE("default c0 is the 30 percent quantile") {
  std::vector<double> energies;
  for (double e = 50; e < 400; e += 3.3) energies.push_back(e);
  const double c0 = default_c0(energies, 1.0, 1.0);
  int above = 0;
  for (double e : energies) above += nu(e, 1.0, 1.0).value >= c0;
  CHECK(above >= int(std::ceil(0.3 * energies.size())));
  // Any larger c0 drops below the fraction.
  int strictly = 0;
  for (double e : energies) strictly += nu(e, 1.0, 1.0).value > c0;
  CHECK(strictly < int(std::ceil(0.3 * energies.size())));
}

TEST_CASE("resonance csv") {
  const auto rep = resonance_report(3.7, kPi, kPi, {0.0, 0.125}, 1.0, 0.5);
  CHECK(rep.z_flags.size() == 2);
  CHECK(resonance_csv_header({0.0, 0.125}).rfind("E,nu,argmin_k,argmin_l", 0) == 0);
  CHECK(resonance_csv_row(rep).rfind("3.7,1.3", 0) == 0);
}
