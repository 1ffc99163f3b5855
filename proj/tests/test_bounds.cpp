// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "billiard/adiabatic.hpp"
#include "billiard/bounds.hpp"
#include "billiard/error.hpp"

using namespace billiard;
using R = Rational;

TEST_CASE("exponents") {
  CHECK(alpha_large(R(2)) == R(1, 3));
  CHECK(alpha_large(R(3, 2)) == R(1, 2));
  CHECK(alpha_large(R(3)) == R(1, 5));
  CHECK(alpha_small(R(2), R(0)) == R(2, 3));
  CHECK(alpha_small(R(2), R(1, 8)) == R(3, 4));
  CHECK(alpha_small(R(3, 2), R(0)) == R(1));
  CHECK(rho(R(2), R(0)) == R(5, 6));
  CHECK(rho(R(2), R(1, 8)) == R(1));
  CHECK(rho(R(3, 2), R(0)) == R(1));
  for (int e = 0; e <= 8; ++e) {
    const R eps(e, 64);
    CHECK(rho(R(2), eps) == (R(5) + R(8) * eps) / R(6));
    CHECK(rho(R(3), eps) <= rho(R(2), eps));
    CHECK(rho(R(2), eps) <= rho(R(2), eps + R(1, 64)));
  }
  CHECK_THROWS_AS((void)rho(R(7, 5), R(0)), Error);
  CHECK_THROWS_AS((void)alpha_small(R(2), R(-1, 8)), Error);
}

TEST_CASE("rational conversion") {
  CHECK(to_rational(1.5) == R(3, 2));
  CHECK(to_rational(0.0625) == R(1, 16));
  CHECK(to_string(R(5, 6)) == "5/6");
  CHECK(to_string(R(2)) == "2");
  CHECK_THROWS_AS((void)to_rational(std::sqrt(2.0)), Error);
}

TEST_CASE("choose and snap b") {
  const auto c = choose_b(1000.0, R(2), R(0), 1.0, 1.0);
  CHECK(c.b_large == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(c.b_small == doctest::Approx(0.01).epsilon(1e-12));

  const auto p = make_truncated_quarter_stadium(1.0, 0.95, 1.0);
  const TensorGrid grid(p, TensorGrid::compatible_ns(p, 195), 16);
  const auto s = snap_b(grid, 0.1, 0.2375);
  CHECK(s.value == grid.s(s.index));
  CHECK(s.error <= grid.hs() / 2 + 1e-15);
  CHECK(s.index > grid.interface_index());
  try {
    (void)snap_b(grid, 1e-4, 0.2375);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Resolution);
  }
  try {
    (void)snap_b(grid, 0.3, 0.2375);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parameter);
  }
}

TEST_CASE("Theil-Sen slope") {
  CHECK(theil_sen_slope({1, 2, 3, 4}, {2, 4, 6, 8}) == doctest::Approx(2.0));
  // One outlier does not move the median slope.
  CHECK(theil_sen_slope({1, 2, 3, 4, 5}, {1, 2, 3, 4, 50}) == doctest::Approx(1.0));
  CHECK(std::isnan(theil_sen_slope({1}, {1})));
}

TEST_CASE("mode checks on the rectangle fixture") {
  const TensorGrid grid(make_constant_rectangle(1.0, 1.0, 1.0), 64, 32);
  const auto pairs = solve_eigenpairs(assemble_forms(grid), 10.0, 60.0);
  for (const auto& pr : pairs) {
    const auto d = decompose(grid, pr, default_kmax(grid, pr.E));
    const auto fg = compute_FG(grid, pr.U, 0.25, d.kmax);
    const auto split = split_modes(grid, d);
    const auto large = check_large_modes(grid, pr, d, fg, split, 0.25);
    CHECK(large.lhs >= 0.0);
    CHECK(std::isfinite(large.term_u));
    const auto small = check_small_modes(grid, pr, d, fg, split, 0.25, 0.0, 1.0);
    if (small.applicable && !small.resonant) {
      CHECK(small.prefactor == doctest::Approx(pr.E / (small.nu * small.nu)));
    }
  }
}

TEST_CASE("theorem sweep invariants") {
  const auto p = make_truncated_quarter_stadium(1.0, 0.95, 1.0);
  const TensorGrid grid(p, TensorGrid::compatible_ns(p, 156), 64);
  auto pairs = solve_eigenpairs(assemble_forms(grid), 100.0, 400.0);
  for (auto& pr : pairs) pr.refine_shift = 0.0;
  BoundConfig cfg;
  cfg.min_pairs = 5;
  cfg.c0 = 0.5;
  const auto rep = theorem_sweep(grid, pairs, cfg);
  CHECK(rep.rho == R(5, 6));
  CHECK(rep.b0 == doctest::Approx(0.95 / 4));
  REQUIRE(rep.rows.size() == pairs.size());
  for (const auto& row : rep.rows) {
    CHECK(row.norm_W + row.norm_R == doctest::Approx(row.norm_Omega).epsilon(1e-12));
    CHECK(row.norm_Omega == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(row.ratio >= 1.0);
    CHECK(row.b_large.value < rep.b0);
    CHECK(row.b_small.value < rep.b0);
    CHECK(row.b_large.value == grid.s(row.b_large.index));
    CHECK(row.in_Z == (row.nu >= 0.5));
  }
  const auto json = nlohmann::json::parse(bound_summary_json(rep));
  CHECK(json.contains("rho"));
  CHECK(bound_csv(rep).find('\n') != std::string::npos);

  cfg.min_pairs = 100000;
  CHECK(theorem_sweep(grid, pairs, cfg).insufficient);
}
