// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "billiard/error.hpp"
#include "billiard/geometry.hpp"

using namespace billiard;

TEST_CASE("quarter stadium widths") {
  const auto p = make_truncated_quarter_stadium(1.0, 0.95);
  CHECK(p.width(0.0) == 1.0);
  CHECK(p.width(-0.5) == 1.0);
  CHECK(p.B1() == doctest::Approx(0.95));
  CHECK(p.width(0.95) == doctest::Approx(std::sqrt(1.0 - 0.9025)).epsilon(1e-12));
  CHECK(p.width(0.95) == doctest::Approx(0.31225).epsilon(1e-5));
  CHECK(p.gamma() == 2.0);
  CHECK(p.c_L() == 0.5);
  CHECK(std::abs(p.width(-1e-12) - p.width(1e-12)) <= 1e-9);
}

TEST_CASE("quarter stadium rejects bad truncation") {
  CHECK_THROWS_AS(make_truncated_quarter_stadium(1.0, 0.4), Error);
  CHECK_THROWS_AS(make_truncated_quarter_stadium(1.0, 1.0), Error);
  CHECK_THROWS_AS(make_truncated_quarter_stadium(-1.0, 0.9), Error);
}

TEST_CASE("power profile") {
  const auto p = make_power_profile(1.0, 1.0, 0.5, 2.0, 0.5);
  CHECK(p.width(0.2) == doctest::Approx(0.98).epsilon(1e-14));
  CHECK(p.slope(0.5) == doctest::Approx(-0.5));
  try {
    (void)make_power_profile(1.0, 1.0, 0.5, 1.4, 0.5);
    FAIL("gamma = 1.4 accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parameter);
  }
  try {
    (void)make_power_profile(1.0, 1.0, 2.0, 2.0, 0.5);
    FAIL("profile reaching zero accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parameter);
    CHECK(std::string(e.what()).find("1.414") != std::string::npos);
  }
}

TEST_CASE("delta_b values") {
  CHECK(delta_b(make_power_profile(1.0, 1.0, 0.5, 2.0, 0.5), 0.1) == doctest::Approx(0.11).epsilon(1e-12));
  CHECK(delta_b(make_constant_rectangle(1.0, 1.0, 1.0), 0.5) == 0.0);
  CHECK(delta_b(make_truncated_quarter_stadium(1.0, 0.95), 0.6) == doctest::Approx(1.3125).epsilon(1e-12));
  CHECK_THROWS_AS((void)delta_b(make_truncated_quarter_stadium(1.0, 0.95), 0.95), Error);
  CHECK_THROWS_AS((void)delta_b(make_truncated_quarter_stadium(1.0, 0.95), 0.0), Error);
}

TEST_CASE("delta_b is monotone and scales like b^(gamma-1)") {
  const BilliardProfile profiles[] = {make_truncated_quarter_stadium(1.0, 0.95),
                                      make_power_profile(1.0, 1.0, 0.5, 1.5, 0.5),
                                      make_power_profile(1.0, 1.0, 0.5, 3.0, 2.0)};
  for (const auto& p : profiles) {
    double prev = 0.0;
    for (int i = 1; i < 100; ++i) {
      const double b = p.B1() * i / 100.0;
      const double d = delta_b(p, b);
      CHECK(d >= prev);
      prev = d;
      if (b <= 0.1 * p.B1()) {
        const double r = d / std::pow(b, p.gamma() - 1) / (p.c_L() * p.gamma());
        CHECK(r >= 0.5);
        CHECK(r <= 2.0);
      }
    }
  }
}

TEST_CASE("validate") {
  const auto rep = validate(make_truncated_quarter_stadium(1.0, 0.95));
  CHECK(rep.all_passed());
  CHECK(rep.width_exponent_slope >= 1.98);
  CHECK(rep.width_exponent_slope <= 2.02);
  CHECK(validate(make_power_profile(1.0, 1.0, 0.5, 1.5, 0.5)).all_passed());

  const auto bumpy = BilliardProfile::custom(
      "bumpy", 1.0, 1.0, 0.5, 2.0, 0.5, [](double x) { return 1.0 - 0.5 * x * x + 0.6 * std::max(0.0, x - 0.3); },
      [](double x) { return -x + (x > 0.3 ? 0.6 : 0.0); });
  const auto bad = validate(bumpy);
  CHECK_FALSE(bad.all_passed());
  bool flagged = false;
  for (const auto& c : bad.checks)
    if (!c.passed && c.name == "wing_non_increasing" != std::string::npos) flagged = true;
  CHECK(flagged);
}

TEST_CASE("record round trip") {
  const auto p = make_truncated_quarter_stadium(1.0, 0.95, 2.0);
  const auto q = BilliardProfile::from_record(p.to_record());
  CHECK(q.kind() == p.kind());
  CHECK(q.B0() == 2.0);
  CHECK(q.width(0.3) == p.width(0.3));
}
