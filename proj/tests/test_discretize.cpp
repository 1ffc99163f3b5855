// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "billiard/discretize.hpp"
#include "billiard/error.hpp"
#include "billiard/resonance.hpp"

using namespace billiard;

namespace {

std::vector<double> rectangle_levels(int count) {
  std::vector<double> out;
  for (int k = 1; k <= 12; ++k)
    for (int l = 1; l <= 24; ++l) out.push_back(k * k * kPiSq + l * l * kPiSq / 4.0);
  std::sort(out.begin(), out.end());
  out.resize(std::size_t(count));
  return out;
}

}  // namespace

TEST_CASE("quadrature area of the quarter stadium") {
  const auto p = make_truncated_quarter_stadium(1.0, 0.95, 1.0);
  const TensorGrid grid(p, TensorGrid::compatible_ns(p, 200), 40);
  const double x = 0.95;
  const double area = 1.0 + (x * std::sqrt(1 - x * x) + std::asin(x)) / 2.0;
  // 2-point Gauss in s on a smooth width: the error is O(hs^4).
  CHECK(std::abs(assemble_forms(grid).total_mass - area) <= 1e-7);
  const TensorGrid fine(p, TensorGrid::compatible_ns(p, 800), 16);
  CHECK(std::abs(assemble_forms(fine).total_mass - area) <= 1e-9);
}

TEST_CASE("interface lies on a grid line") {
  const auto p = make_truncated_quarter_stadium(1.0, 0.95, 1.0);
  const int ns = TensorGrid::compatible_ns(p, 100);
  const TensorGrid grid(p, ns, 16);
  CHECK(grid.s(grid.interface_index()) == 0.0);
  CHECK_THROWS_AS(TensorGrid(p, ns + 1, 16), Error);
  CHECK_THROWS_AS(TensorGrid(p, 4, 16), Error);
}

TEST_CASE("rectangle spectrum and convergence order") {
  const auto p = make_constant_rectangle(1.0, 1.0, 1.0);
  const auto exact = rectangle_levels(10);
  const TensorGrid coarse(p, 64, 32), fine(p, 128, 64);
  const auto ec = solve_lowest(assemble_forms(coarse), 10);
  const auto ef = solve_lowest(assemble_forms(fine), 10);
  REQUIRE(ef.size() == 10);
  REQUIRE(ec.size() == 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(ef[i].E - exact[i]) / exact[i] <= 0.01);
    CHECK(ef[i].residual <= 1e-8);
    CHECK(ef[i].index == i);
  }
  CHECK(ef[0].E == doctest::Approx(12.337).epsilon(0.01));
  const double ratio = (ec[0].E - exact[0]) / (ef[0].E - exact[0]);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("window solve, inertia count and empty window") {
  const auto p = make_constant_rectangle(1.0, 1.0, 1.0);
  const TensorGrid grid(p, 64, 32);
  const auto forms = assemble_forms(grid);
  const auto pairs = solve_eigenpairs(forms, 10.0, 60.0);
  CHECK(pairs.size() == 6);
  CHECK(count_below(forms, 60.0) - count_below(forms, 10.0) == 6);
  CHECK(solve_eigenpairs(forms, 13.0, 19.0).empty());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].U.dot(forms.M * pairs[i].U) == doctest::Approx(1.0).epsilon(1e-10));
    for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(pairs[i].U.dot(forms.M * pairs[j].U)) <= 1e-8);
    CHECK(pairs[i].U.dot(forms.Kq * pairs[i].U) == doctest::Approx(pairs[i].E).epsilon(1e-9));
  }
  // 49.348 = pi^2 (1 + 4) appears twice: (1,4) and (2,2) in the k^2 + l^2/4 lattice.
  CHECK(pairs[4].E == doctest::Approx(pairs[5].E).epsilon(1e-3));
}

TEST_CASE("region integrals are additive and match the forms") {
  const auto p = make_truncated_quarter_stadium(1.0, 0.95, 1.0);
  const TensorGrid grid(p, TensorGrid::compatible_ns(p, 78), 24);
  const auto forms = assemble_forms(grid);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Vector U(grid.num_dofs()), V(grid.num_dofs());
  for (int i = 0; i < U.size(); ++i) {
    U[i] = g(rng);
    V[i] = g(rng);
  }
  const int mid = grid.interface_index();
  const auto left = integrate_region(grid, U, V, {0, mid});
  const auto right = integrate_region(grid, U, V, {mid, grid.ns()});
  const auto all = integrate_region(grid, U, V, all_cells(grid));
  CHECK(left.mass + right.mass == doctest::Approx(all.mass).epsilon(1e-12));
  CHECK(left.q + right.q == doctest::Approx(all.q).epsilon(1e-12));
  CHECK(all.mass == doctest::Approx(U.dot(forms.M * V)).epsilon(1e-10));
  CHECK(all.q == doctest::Approx(U.dot(forms.Kq * V)).epsilon(1e-10));
  CHECK(all.a == doctest::Approx(U.dot(forms.Ka * V)).epsilon(1e-10));
  // On the rectangle part q and a coincide.
  CHECK(left.q == doctest::Approx(left.a).epsilon(1e-12));
  const auto rforms = assemble_forms(grid, {mid, grid.ns()});
  CHECK(right.q == doctest::Approx(U.dot(rforms.Kq * V)).epsilon(1e-10));
}

TEST_CASE("stadium eigenpairs have small residuals and a Rayleigh quotient equal to E") {
  const auto p = make_truncated_quarter_stadium(1.0, 0.95, 1.0);
  const TensorGrid grid(p, TensorGrid::compatible_ns(p, 78), 40);
  const auto forms = assemble_forms(grid);
  const auto pairs = solve_eigenpairs(forms, 100.0, 300.0);
  REQUIRE_FALSE(pairs.empty());
  for (const auto& pr : pairs) {
    CHECK(pr.residual <= 1e-8);
    CHECK(relative_residual(forms, pr.E, pr.U) <= 1e-8);
    const double rq = pr.U.dot(forms.Kq * pr.U) / pr.U.dot(forms.M * pr.U);
    CHECK(rq == doctest::Approx(pr.E).epsilon(1e-10));
    CHECK(pr.E >= 100.0);
    CHECK(pr.E < 300.0);
  }
  CHECK(long(pairs.size()) == count_below(forms, 300.0) - count_below(forms, 100.0));
}

TEST_CASE("restrict_norm snaps and rejects empty regions") {
  const auto p = make_constant_rectangle(1.0, 1.0, 1.0);
  const TensorGrid grid(p, 64, 16);
  const auto pairs = solve_lowest(assemble_forms(grid), 1);
  const auto whole = restrict_norm(grid, pairs[0].U, -1.0, 1.0);
  CHECK(whole.value == doctest::Approx(1.0).epsilon(1e-10));
  const auto half = restrict_norm(grid, pairs[0].U, 0.0, 1.0);
  CHECK(half.value == doctest::Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS((void)restrict_norm(grid, pairs[0].U, 0.3, 0.3), Error);
}
