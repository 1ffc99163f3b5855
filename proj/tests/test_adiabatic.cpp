// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "billiard/adiabatic.hpp"
#include "billiard/error.hpp"

using namespace billiard;

namespace {

constexpr double kPi = std::numbers::pi;

Vector nodal(const TensorGrid& g, const std::function<double(double, double)>& f) {
  Vector U(g.num_dofs());
  for (int i = 1; i < g.ns(); ++i)
    for (int j = 1; j < g.nt(); ++j) U[g.dof(i, j)] = f(g.s(i), g.t(j));
  return U;
}

Vector random_field(const TensorGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  // Smooth random field: a few low modes in each direction.
  double c[4][4];
  for (auto& row : c)
    for (double& x : row) x = n(rng);
  const double B0 = g.profile().B0(), len = B0 + g.profile().B1();
  return nodal(g, [&](double s, double t) {
    double v = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) v += c[a][b] * std::sin((a + 1) * kPi * (s + B0) / len) * std::sin((b + 1) * kPi * t);
    return v;
  });
}

TensorGrid stadium_grid(int ns_min, int nt) {
  const auto p = make_truncated_quarter_stadium(1.0, 0.95, 1.0);
  return TensorGrid(p, TensorGrid::compatible_ns(p, ns_min), nt);
}

}  // namespace

TEST_CASE("large-mode threshold") {
  CHECK(large_mode_threshold(100.0, kPi) == 15);
  // k^2 = 2E exactly: the tie is a large mode.
  CHECK(large_mode_threshold(8.0, kPi) == 4);
  CHECK(large_mode_threshold(8.0 + 1e-9, kPi) == 5);
  CHECK_THROWS_AS((void)large_mode_threshold(-1.0, 1.0), Error);
}

TEST_CASE("symbols approach their continuum values") {
  CHECK(mass_symbol(1, 4096) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(stiffness_symbol(3, 4096) == doctest::Approx(9 * kPi * kPi / 2).epsilon(1e-5));
}

TEST_CASE("separable fields decompose onto one mode") {
  const auto g = stadium_grid(78, 32);
  const auto U = nodal(g, [](double s, double t) { return std::cos(s) * std::sin(kPi * t); });
  const auto d = decompose(g, U, 10.0, 10);
  for (int i = 1; i < g.ns(); ++i) {
    CHECK(std::abs(d.mode(1)[i] - std::cos(g.s(i))) <= 1e-10);
    for (int k = 2; k <= d.kmax; ++k) CHECK(std::abs(d.mode(k)[i]) <= 1e-10);
  }
  const auto U2 = nodal(g, [](double, double t) { return std::sin(2 * kPi * t); });
  const auto d2 = decompose(g, U2, 10.0, 10);
  for (int i = 1; i < g.ns(); ++i) {
    CHECK(std::abs(d2.mode(2)[i] - 1.0) <= 1e-10);
    CHECK(std::abs(d2.mode(1)[i]) <= 1e-10);
  }
}

TEST_CASE("rectangle eigenmode recovers its s-profile") {
  const TensorGrid g(make_constant_rectangle(1.0, 1.0, 1.0), 64, 32);
  const auto U = nodal(g, [](double s, double t) { return std::sin(3 * kPi * (s + 1) / 2) * std::sin(2 * kPi * t); });
  const auto d = decompose(g, U, 20.0, 12);
  for (int i = 0; i <= g.ns(); ++i) CHECK(std::abs(d.mode(2)[i] - std::sin(3 * kPi * (g.s(i) + 1) / 2)) <= 1e-6);
}

TEST_CASE("decomposition keeps the total mass") {
  const auto g = stadium_grid(78, 40);
  const auto forms = assemble_forms(g);
  const auto U = random_field(g, 3);
  const auto d = decompose(g, U, 50.0, 20);
  CHECK(d.total_mass == doctest::Approx(U.dot(forms.M * U)).epsilon(1e-10));
  CHECK(d.tail_mass >= 0.0);
  CHECK_THROWS_AS((void)decompose(g, U, 50.0, 6), Error);
  CHECK_THROWS_AS((void)decompose(g, U, 50.0, 40), Error);
}

TEST_CASE("forms on the rectangle: a = q and the gap functional vanishes") {
  const TensorGrid g(make_constant_rectangle(1.0, 1.0, 1.0), 64, 32);
  const auto pairs = solve_lowest(assemble_forms(g), 3);
  for (const auto& pr : pairs) {
    const auto d = decompose(g, pr, 10);
    const auto fv = form_values(g, pr.U, d, 0.5);
    CHECK(fv.a_matrix == doctest::Approx(fv.q).epsilon(1e-12));
    const auto v = random_field(g, 5);
    const auto gf = gap_functional(g, pr, v, 1.0);
    CHECK(std::abs(gf.lambda) <= 1e-10 * std::abs(gf.a_uv) + 1e-12);
    CHECK(gf.within_bound);
  }
}

TEST_CASE("stadium forms") {
  const auto g = stadium_grid(117, 64);
  const auto forms = assemble_forms(g);
  const auto pairs = solve_eigenpairs(forms, 60.0, 120.0);
  REQUIRE_FALSE(pairs.empty());
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n;
  for (const auto& pr : pairs) {
    const int kmax = default_kmax(g, pr.E);
    const auto d = decompose(g, pr, kmax);
    const auto whole = form_values(g, pr.U, d, g.profile().B1());
    CHECK(whole.n_matrix == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(whole.q == doctest::Approx(pr.E).epsilon(1e-8));
    CHECK(std::abs(whole.n_gap()) <= d.tail_mass + 1e-12);

    // v = u: the functional is the form discrepancy.
    const auto self = gap_functional(g, pr, pr.U, g.profile().B1());
    CHECK(self.lambda == doctest::Approx(whole.a_matrix - whole.q).epsilon(1e-10));
    CHECK(std::abs(self.quasi_defect) <= 1e-6);

    for (double b : {0.2, 0.5}) {
      const auto snap = g.snap_s(b);
      Vector v(g.num_dofs());
      for (int i = 1; i < g.ns(); ++i)
        for (int j = 1; j < g.nt(); ++j) v[g.dof(i, j)] = i < snap.index ? n(rng) : 0.0;
      const auto gf = gap_functional(g, pr, v, b);
      CHECK(gf.within_bound);
      const auto pl = plancherel_ratio(g, d, b);
      CHECK(pl.ratio >= pl.lower * (1 - 1e-12));
      CHECK(pl.ratio <= pl.upper * (1 + 1e-12));
    }
  }
  Vector outside = Vector::Zero(g.num_dofs());
  outside[g.dof(g.ns() - 1, 3)] = 1.0;
  CHECK_THROWS_AS((void)gap_functional(g, pairs[0], outside, 0.3), Error);
}

TEST_CASE("F and G functionals") {
  const TensorGrid g(make_constant_rectangle(1.0, 1.0, 1.0), 64, 256);
  const auto U = nodal(g, [](double, double t) { return std::sin(kPi * t); });
  const auto fg = compute_FG(g, U, 0.5, 4);
  for (std::size_t i = 0; i < fg.s.size(); ++i) {
    for (int k = 1; k <= 4; ++k) CHECK(std::abs(fg.F(k - 1, long(i))) <= 1e-12);
    // G_1 = pi int t sin(2 pi t) dt = -1/2; nodal differences are second order.
    CHECK(fg.G(0, long(i)) == doctest::Approx(-0.5).epsilon(1e-4));
  }
  CHECK(fg.C_G <= 1.0 + 1e-6);

  // Plancherel in y bounds both sums by 2 sup L.
  const auto gs = stadium_grid(117, 64);
  const auto V = random_field(gs, 9);
  const auto fs = compute_FG(gs, V, 0.4, 63);
  CHECK(fs.C_F <= fs.ceiling);
  CHECK(fs.C_G <= fs.ceiling);
  CHECK(fs.C_G > 0.0);
}

TEST_CASE("mode split follows the mode index") {
  const TensorGrid g(make_constant_rectangle(1.0, 1.0, 1.0), 64, 32);
  // E = 50: k* = ceil(10 / pi) = 4.
  const auto low = nodal(g, [](double s, double t) { return std::sin(kPi * (s + 1) / 2) * std::sin(2 * kPi * t); });
  const auto high = nodal(g, [](double s, double t) { return std::sin(kPi * (s + 1) / 2) * std::sin(6 * kPi * t); });
  const auto sl = split_modes(g, decompose(g, low, 50.0, 12));
  CHECK(sl.plus_mass <= 1e-20);
  CHECK(sl.minus_mass > 0.1);
  const auto sh = split_modes(g, decompose(g, high, 50.0, 12));
  CHECK(sh.minus_mass <= 1e-20);
  CHECK(sh.plus_mass > 0.1);
}

TEST_CASE("one-dimensional mode forms") {
  const TensorGrid g(make_constant_rectangle(1.0, 1.0, 1.0), 256, 16);
  std::vector<double> f(std::size_t(g.ns() + 1));
  for (int i = 0; i <= g.ns(); ++i) f[std::size_t(i)] = std::sin(kPi * (g.s(i) + 1) / 2);
  // int_{-1}^{1} (pi/2)^2 cos^2 + k^2 pi^2 sin^2, times L/2 = 1/2.
  const double want = 0.5 * (kPi * kPi / 4 + 4 * kPi * kPi);
  CHECK(mode_form(g, f, 2, 1.0) == doctest::Approx(want).epsilon(1e-4));
  CHECK(h1_norm_sq(g, f, 1.0) == doctest::Approx(kPi * kPi / 4 + 1).epsilon(1e-4));
}

TEST_CASE("mode form is equivalent to the H1 norm") {
  const auto gs = stadium_grid(117, 16);
  const auto& p = gs.profile();
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    const double b = 0.1 + 0.04 * trial;
    const int end = gs.snap_s(b).index;
    const double bs = gs.s(end);
    std::vector<double> f(std::size_t(gs.ns() + 1), 0.0);
    for (int i = 1; i < end; ++i) f[std::size_t(i)] = n(rng);
    for (int k : {1, 3, 10}) {
      const double two_a = 2 * mode_form(gs, f, k, bs);
      const double h1 = h1_norm_sq(gs, f, bs);
      const double kk = k * k * kPi * kPi;
      CHECK(std::min(p.width(bs), kk / p.L0()) * h1 <= two_a * (1 + 1e-12));
      CHECK(two_a <= std::max(p.L0(), kk / p.width(bs)) * h1 * (1 + 1e-12));
    }
  }
}
