// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "billiard/error.hpp"
#include "billiard/onedim.hpp"

using namespace billiard;

namespace {
constexpr double kPi = std::numbers::pi;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Internal;
}
}  // namespace

TEST_CASE("S_z and C_z") {
  CHECK(sz(4.0, 0.5) == doctest::Approx(std::sin(1.0) / 2));
  CHECK(sz(0.0, 0.7) == 0.7);
  CHECK(sz(-4.0, 0.5) == doctest::Approx(std::sinh(1.0) / 2));
  CHECK(cz(-4.0, 0.5) == doctest::Approx(std::cosh(1.0)));
  CHECK(sz(1e-14, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("H^-1 norms") {
  const Mesh1D mesh(1.0, 1.0, 256, 256);
  CHECK(hminus1_norm(mesh, [](double) { return 0.0; }) == 0.0);
  CHECK(hminus1_norm(mesh, [](double) { return 1.0; }) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-6));
  const auto load = [](double x) { return std::exp(x) * std::cos(3 * x); };
  const double n1 = hminus1_norm(Mesh1D(1.0, 1.0, 128, 128), load);
  const double n2 = hminus1_norm(Mesh1D(1.0, 1.0, 256, 256), load);
  CHECK(std::abs(n1 - n2) / n2 < 1e-4);

  // h = H' with H = 1 on (0, b): the bound ||H|| >= ||h|| / (1 + sqrt b).
  const Mesh1D m2(1.0, 0.2, 64, 64);
  const auto H = sample_split(m2, [](double) { return 0.0; }, [](double x) { return std::sin(7 * x); });
  const auto an = hminus1_from_antiderivative(m2, H);
  CHECK(an.holds);
  CHECK(an.H_norm >= an.bound);
}

TEST_CASE("Green function") {
  const GreenFunction g(4.0, 1.0, 0.2);
  CHECK(g(-0.5) == doctest::Approx(std::sin(1.0) / 2 * std::sin(0.4) / 2).epsilon(1e-12));
  CHECK(g(-0.5) == doctest::Approx(0.0819212).epsilon(1e-6));
  CHECK(g(-1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(g(0.2)) <= 1e-15);
  const GreenFunction c(1.0, kPi / 2, 0.7);
  CHECK(c(-1e-13) == doctest::Approx(std::sin(0.7)).epsilon(1e-9));
  CHECK(c(1e-13) == doctest::Approx(std::sin(0.7)).epsilon(1e-9));
  CHECK(g.derivative(0.0, true) - g.derivative(0.0, false) == doctest::Approx(g.jump()).epsilon(1e-12));
  CHECK(g.jump() == doctest::Approx(-std::sin(2.0 * 1.2) / 2.0).epsilon(1e-12));

  // -G'' - z G = 0 away from 0 by centered differences on a 1e-3 mesh.
  const double h = 1e-3;
  double worst = 0.0;
  for (double x = -0.95; x < 0.19; x += 0.01) {
    if (std::abs(x) < 2 * h) continue;
    const double r = -(g(x + h) - 2 * g(x) + g(x - h)) / (h * h) - 4.0 * g(x);
    worst = std::max(worst, std::abs(r));
  }
  // O(h^2) truncation of the difference quotient.
  CHECK(worst <= 1e-6 * 0.1 + 1e-6);
  CHECK(kind_of([] { GreenFunction(400.0, 1.0, 0.2); }) == ErrorKind::Regime);
}

TEST_CASE("Fourier particular solution") {
  const double b = 0.2;
  const Mesh1D mesh(1.0, b, 64, 64);
  std::vector<double> h(std::size_t(mesh.nr() + 1));
  for (int j = 0; j <= mesh.nr(); ++j) h[std::size_t(j)] = std::sin(kPi * mesh.xr(j) / b);
  for (double z : {0.0, kPi * kPi / (2 * b * b)}) {
    const auto vp = vp_fourier(mesh, h, z);
    const double coef = 1.0 / (kPi * kPi / (b * b) - z);
    for (int j = 0; j <= mesh.nr(); ++j) CHECK(std::abs(vp.v[std::size_t(j)] - coef * h[std::size_t(j)]) <= 1e-12);
  }
  CHECK(kind_of([&] { (void)vp_fourier(mesh, h, 0.95 * kPi * kPi / (b * b)); }) == ErrorKind::Regime);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    for (double& v : h) v = n(rng);
    h.front() = 0.0;
    worst = std::max(worst, vp_fourier(mesh, h, 0.3 * kPi * kPi / (b * b)).ratio);
  }
  CHECK(std::isfinite(worst));
  CHECK(worst > 0.0);
}

TEST_CASE("Duhamel particular solution") {
  const Mesh1D mesh(1.0, 0.2, 64, 64);
  const auto zero = sample(mesh, [](double) { return 0.0; });
  const auto vz = vp_duhamel(mesh, zero, 10.0);
  for (double v : vz.v.right) CHECK(v == 0.0);
  const auto one = sample_split(mesh, [](double) { return 0.0; }, [](double) { return 1.0; });
  const auto vp = vp_duhamel(mesh, one, 10.0);
  CHECK(mesh.xr(32) == doctest::Approx(0.1));
  CHECK(vp.v.right[32] == doctest::Approx(std::sin(1.0) / 10).epsilon(1e-12));
  CHECK(vp.envelope_ok);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 50; ++trial) {
    Field1D H = zero;
    for (double& v : H.right) v = n(rng);
    CHECK(vp_duhamel(mesh, H, 5.0 + 40.0 * trial).envelope_ratio <= 1.0 + 1e-12);
  }
  Field1D bad = one;
  bad.left[3] = 1.0;
  CHECK(kind_of([&] { (void)vp_duhamel(mesh, bad, 10.0); }) == ErrorKind::Precondition);
  CHECK(kind_of([&] { (void)vp_duhamel(mesh, one, 1.0); }) == ErrorKind::Regime);
}

TEST_CASE("regimes") {
  const double beta = kPi / 2;
  CHECK(classify(-25.0, 0.1, beta) == Regime::Low);
  CHECK(classify(beta * beta, 0.1, beta) == Regime::Low);
  CHECK(classify(50.0, 0.1, beta) == Regime::Middle);
  CHECK(classify(100.0, 0.1, beta) == Regime::High);
}

TEST_CASE("control estimate") {
  const double B0 = 1.0, b = 0.1, beta = kPi / 2;
  const auto mesh = Mesh1D::with_density(B0, b, 64, 128);

  // Homogeneous solution, high regime: only the u term is left.
  const double z = 400.0;
  ModeProblem p{z, [](double) { return 0.0; }, std::sqrt(z), mesh};
  const auto r = verify_control(p, [&](double x) { return sz(z, x + B0); }, beta);
  CHECK(r.regime == Regime::High);
  CHECK(r.constant == doctest::Approx(r.u_left / (r.u_right / std::sqrt(b))).epsilon(1e-9));
  CHECK(std::isfinite(r.constant));

  std::mt19937_64 rng(3);
  const auto ms = ManufacturedSolution::random(B0, b, -25.0, rng);
  const auto low = verify_control(ms.problem(mesh), [&](double x) { return ms.u(x); }, beta);
  CHECK(low.regime == Regime::Low);
  CHECK(low.residual <= 1e-6);
  CHECK(std::isfinite(low.constant));

  CHECK(kind_of([&] { (void)verify_control(p, [&](double x) { return 1.0 + sz(z, x + B0); }, beta); }) ==
        ErrorKind::Precondition);
  CHECK(kind_of([&] { (void)verify_control(p, [&](double x) { return sz(z, x + B0) + 0.01 * sz(z, x + B0) * x * x; }, beta); }) ==
        ErrorKind::NotASolution);
}

TEST_CASE("convexity") {
  const auto c = convexity_check(5.0, 1.0, 0.2, 0.2);
  CHECK(c.holds);
  // int_0^a sinh^2 = (sinh(2a)/2 - a)/2 with a = omega (x + B0).
  const auto I = [](double a) { return (std::sinh(2 * a) / 2 - a) / 2; };
  CHECK(c.lhs == doctest::Approx(0.2 * I(6.0) / 5.0).epsilon(1e-10));
  CHECK(c.rhs == doctest::Approx(1.2 * (I(6.0) - I(5.0)) / 5.0).epsilon(1e-10));
  const auto lin = convexity_check(0.0, 1.0, 0.1, 0.2);
  CHECK(lin.holds);
  CHECK(lin.lhs == doctest::Approx(0.1 * std::pow(1.1, 3) / 3).epsilon(1e-12));

  const auto stadium = make_truncated_quarter_stadium(1.0, 0.95);
  for (int k : {5, 8}) {
    for (double b : {0.05, 0.2}) CHECK(convexity_check(stadium, k, 100.0, b, 0.2).holds);
  }
  CHECK(kind_of([&] { (void)convexity_check(stadium, 1, 100.0, 0.1, 0.2); }) == ErrorKind::Regime);

  const Mesh1D mesh(1.0, 0.2, 64, 64);
  const auto w = sample(mesh, [](double x) { return 2.0 + x; });
  CHECK(kind_of([&] { (void)convexity_check(mesh, w, 0.2); }) == ErrorKind::Precondition);
}

TEST_CASE("sinh ratio F") {
  CHECK(sinh_ratio_F(0.01) / 0.01 >= 0.333);
  CHECK(sinh_ratio_F(0.01) / 0.01 <= 0.334);
  CHECK(sinh_ratio_F(1.0) == doctest::Approx((std::sinh(2.0) / 2 - 1) / (2 * std::sinh(1.0) * std::sinh(1.0))).epsilon(1e-10));
  CHECK(sinh_ratio_F(1.0) == doctest::Approx(0.29448).epsilon(1e-4));
  // The integral of sinh^2 over sinh^2 at the endpoint tends to 1/2.
  CHECK(sinh_ratio_F(30.0) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(sinh_ratio_F(300.0) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("cutoff") {
  CHECK(cutoff(0.3) == 1.0);
  CHECK(cutoff(1.1) == 0.0);
  CHECK(cutoff(0.75) == doctest::Approx(0.5));
  double prev = 1.0;
  for (double x = 0.5; x <= 1.0; x += 0.01) {
    CHECK(cutoff(x) <= prev + 1e-15);
    prev = cutoff(x);
    const double h = 1e-5;
    CHECK(cutoff_d1(x) == doctest::Approx((cutoff(x + h) - cutoff(x - h)) / (2 * h)).epsilon(1e-5));
    CHECK(cutoff_d2(x) ==
          doctest::Approx((cutoff_d1(x + h) - cutoff_d1(x - h)) / (2 * h)).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("cutoff commutator") {
  for (double b : {0.05, 0.1, 0.2}) {
    const Mesh1D mesh(1.0, b, 64, 128);
    const auto early = sample(mesh, [&](double x) { return x > 0 && x < b / 4 ? std::sin(4 * kPi * x / b) : 0.0; });
    const auto r0 = cutoff_commutator(mesh, early);
    CHECK(r0.first == 0.0);
    CHECK(r0.second == 0.0);
  }
  const auto ones = [](const Mesh1D& m) { return sample_split(m, [](double) { return 0.0; }, [](double) { return 1.0; }); };
  const Mesh1D coarse(1.0, 0.1, 128, 256), fine(1.0, 0.1, 256, 512);
  const auto rc = cutoff_commutator(coarse, ones(coarse));
  const auto rf = cutoff_commutator(fine, ones(fine));
  CHECK(std::abs(rc.first_ratio - rf.first_ratio) / rf.first_ratio < 1e-3);
  CHECK(std::abs(rc.second_ratio - rf.second_ratio) / rf.second_ratio < 1e-3);

  std::vector<double> ratios;
  for (double b : {0.05, 0.1, 0.2}) {
    const Mesh1D m(1.0, b, 64, 128);
    ratios.push_back(cutoff_commutator(m, sample_split(m, [](double) { return 0.0; }, [&](double x) {
                                         return std::sin(kPi * x / b);
                                       })).second_ratio);
  }
  for (double r : ratios) CHECK(r == doctest::Approx(ratios[1]).epsilon(0.2));
}

TEST_CASE("small control sweep") {
  ControlSweepOptions o;
  o.samples = 3;
  o.b_values = {0.1, 0.2};
  const auto sweep = control_sweep(o);
  CHECK(sweep.rows.size() == o.z_specs.size() * o.b_values.size());
  CHECK(sweep.beta == doctest::Approx(kPi / 2));
  for (const auto& row : sweep.rows) CHECK(std::isfinite(row.constant));
  CHECK(control_sweep_csv(sweep).rfind("z,b,regime,", 0) == 0);
}
