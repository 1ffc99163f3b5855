// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, exit 0 only when all pass.
// The quarter-stadium eigenpairs are cached under --dir and reused.

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "billiard/adiabatic.hpp"
#include "billiard/bounds.hpp"
#include "billiard/cache.hpp"
#include "billiard/error.hpp"
#include "billiard/numfmt.hpp"
#include "billiard/onedim.hpp"
#include "billiard/pipeline.hpp"
#include "billiard/resonance.hpp"

using namespace billiard;

namespace {

// Tolerances.
constexpr double kSolverRel = 0.01;
constexpr double kRatioLo = 3.5, kRatioHi = 4.5;
constexpr double kModeSumRel = 1e-6;
constexpr double kNormDefect = 1e-8;
constexpr int kRandomV = 100;
constexpr int kOnedimSamples = 50;
constexpr double kSlopeBand1D = 0.15;
constexpr double kLimitRel = 0.01;
constexpr int kNuTrials = 1000;
constexpr double kStepLimitRel = 0.01;
constexpr int kMinPairs = 100;
constexpr double kValidation = 1.1;
constexpr double kSlopeAllowance = 0.1;
constexpr double kTermSlopeBand = 0.3;

constexpr double kPi = 3.14159265358979323846;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string g(double v) { return fmt15(v); }

void exponents() {
  bool identity = true;
  try {
    for (const Rational gm : {Rational(3, 2), Rational(2), Rational(3)})
      for (const Rational e : {Rational(0), Rational(1, 16), Rational(1, 8)}) {
        const Rational r = rho(gm, e);
        identity = identity && r == (Rational(1) + Rational(2) * e + alpha_small(gm, e)) / Rational(2);
      }
  } catch (const Error&) {
    identity = false;
  }
  const Rational r0 = rho(Rational(2), Rational(0));
  const Rational r8 = rho(Rational(2), Rational(1, 8));
  report(1, "exponents", identity && r0 == Rational(5, 6) && r8 == Rational(1),
         "rho(2,0) = " + to_string(r0) + ", rho(2,1/8) = " + to_string(r8) + ", identity on 9 lattice points " +
             (identity ? "exact" : "violated"));
}

void solver_oracle() {
  const auto p = make_constant_rectangle(1.0, 1.0, 1.0);
  std::vector<double> exact;
  for (int k = 1; k <= 10; ++k)
    for (int l = 1; l <= 20; ++l) exact.push_back(k * k * kPiSq + l * l * kPiSq / 4.0);
  std::sort(exact.begin(), exact.end());
  const auto fine = solve_lowest(assemble_forms(TensorGrid(p, 128, 64)), 10);
  const auto coarse = solve_lowest(assemble_forms(TensorGrid(p, 64, 32)), 10);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) worst = std::max(worst, std::abs(fine[i].E - exact[i]) / exact[i]);
  const double ratio = (coarse[0].E - exact[0]) / (fine[0].E - exact[0]);
  report(2, "solver_oracle", fine.size() == 10 && worst <= kSolverRel && ratio >= kRatioLo && ratio <= kRatioHi,
         "max relative error of 10 eigenvalues " + g(worst) + " (<= " + g(kSolverRel) + "), refinement ratio " +
             g(ratio) + " (in [3.5, 4.5])");
}

void form_identities(const TensorGrid& grid, const std::vector<EigenPair>& pairs) {
  const auto& prof = grid.profile();
  const double bs[2] = {prof.B1() / 4.0, prof.B1() / 2.0};
  double worst_gap = 0.0, worst_n = 0.0;
  int gap_bad = 0, n_bad = 0;
  for (const auto& p : pairs) {
    const auto dec = decompose(grid, p, default_kmax(grid, p.E));
    for (double b : bs) {
      const auto fv = form_values(grid, p.U, dec, b);
      const double rel = std::abs(fv.a_gap()) / fv.a_matrix;
      worst_gap = std::max(worst_gap, rel);
      gap_bad += rel > kModeSumRel;
    }
    const double n = std::abs(integrate_region(grid, p.U, p.U, all_cells(grid)).mass - 1.0);
    worst_n = std::max(worst_n, n);
    n_bad += n > kNormDefect;
  }
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> nd;
  int violations = 0;
  for (int r = 0; r < kRandomV; ++r) {
    const EigenPair& p = pairs[std::size_t(r) % pairs.size()];
    const double b = bs[r % 2];
    const int end = grid.snap_s(b).index;
    Vector v = Vector::Zero(grid.num_dofs());
    for (int i = 1; i < end; ++i)
      for (int j = 1; j < grid.nt(); ++j) v[grid.dof(i, j)] = nd(rng);
    violations += !gap_functional(grid, p, v, b).within_bound;
  }
  report(3, "form_identities", gap_bad == 0 && n_bad == 0 && violations == 0,
         std::to_string(pairs.size()) + " pairs: mode-sum a_b gap above 1e-6 in " + std::to_string(gap_bad) + "/" +
             std::to_string(2 * pairs.size()) + " (worst " + g(worst_gap) + "), |N - 1| above 1e-8 in " +
             std::to_string(n_bad) + " (worst " + g(worst_n) + "), norm equivalence violations " +
             std::to_string(violations) + "/" + std::to_string(kRandomV));
}

void onedim_suite() {
  ControlSweepOptions opts;
  opts.samples = kOnedimSamples;
  const ControlSweep sweep = control_sweep(opts);
  bool finite = true;
  for (const auto& r : sweep.rows) finite = finite && std::isfinite(r.constant) && r.constant > 0;
  bool slopes = true;
  std::string slope_text;
  for (const auto& rs : sweep.regimes) {
    slopes = slopes && std::abs(rs.slope) <= kSlopeBand1D;
    slope_text += (slope_text.empty() ? "" : ", ") + to_string(rs.regime) + " " + g(rs.slope);
  }

  int green_bad = 0;
  for (double b : {0.05, 0.1, 0.2})
    for (double z : {-25.0, -1.0, 2.0, 0.5 / (b * b), 4.0 / (b * b)}) {
      const GreenFunction gf(z, 1.0, b);
      const double scale = std::max(std::abs(gf(-0.5)), std::abs(gf(0.0)));
      const double jump = gf.derivative(0.0, true) - gf.derivative(0.0, false);
      green_bad += std::abs(gf(1e-10) - gf(-1e-10)) > 1e-7 * scale;
      green_bad += std::abs(jump - gf.jump()) > 1e-10 * std::max(std::abs(gf.jump()), 1e-300);
      green_bad += std::abs(gf(-1.0)) > 1e-12 * scale || std::abs(gf(b)) > 1e-12 * scale;
    }

  int convex_bad = 0;
  for (double B0 : {1.0, 2.0})
    for (double b : {0.01, 0.05, 0.1, 0.2})
      for (double omega : {0.0, 1.0, 10.0, 100.0}) convex_bad += !convexity_check(omega, B0, b, 0.25).holds;
  const auto stadium = make_truncated_quarter_stadium(1.0, 0.95, 2.0);
  for (double E : {200.0, 800.0, 1500.0}) {
    const int ks = large_mode_threshold(E, 1.0);
    for (int k = ks; k <= ks + 4; ++k)
      for (double b : {0.05, 0.2}) convex_bad += !convexity_check(stadium, k, E, b, stadium.B1() / 4).holds;
  }

  const double at0 = sinh_ratio_F(0.01) / 0.01;
  const double atinf = sinh_ratio_F(30.0);
  const bool limit0 = std::abs(at0 - 1.0 / 3.0) <= kLimitRel / 3.0;
  const bool limitinf = std::abs(atinf - 1.0) <= kLimitRel;

  report(4, "onedim_suite", finite && slopes && green_bad == 0 && convex_bad == 0 && limit0 && limitinf,
         std::string("constants ") + (finite ? "finite" : "not finite") + "; regime slopes " + slope_text +
             " (|slope| <= 0.15); Green violations " + std::to_string(green_bad) + "; convexity violations " +
             std::to_string(convex_bad) + "; F(0.01)/0.01 = " + g(at0) + " (1/3); F(30) = " + g(atinf) + " (1)");
}

void resonance_suite() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> energy(1.0, 5000.0);
  int mismatches = 0;
  for (int t = 0; t < kNuTrials; ++t) {
    const double E = energy(rng);
    double best = std::numeric_limits<double>::infinity();
    // l pi / 2 reaches sqrt(5000) near l = 45; the box goes well past it.
    for (int k = 1; k <= 120; ++k)
      for (int l = 1; l <= 120; ++l) best = std::min(best, std::abs(E - rect_level(k, l, 1.0, 2.0)));
    mismatches += nu(E, 1.0, 2.0).value != best;
  }

  bool flat = true;
  for (double lam = 0.01; lam <= kPi / 2; lam += 0.01) flat = flat && step_ratio(lam, kPi) == 1.0;
  flat = flat && step_ratio(kPi / 2, kPi) == 1.0;
  double limit_dev = 0.0;
  for (double lam = 100 * kPi; lam <= 400 * kPi; lam += 0.917)
    limit_dev = std::max(limit_dev, std::abs(step_ratio(lam, kPi) - 2.0) / 2.0);
  bool envelope = true;
  for (double lam = 0.01; lam <= 50; lam += 0.01) envelope = envelope && step_ratio(lam, kPi) <= step_envelope(lam, kPi, 50);

  double lowest = std::numeric_limits<double>::infinity();
  int zero = 0;
  const double beta = kPi / 2;
  for (double E = 50.0; E <= 2000.0; E += 0.731) {
    if (nu(E, 1.0, 1.0).value == 0.0) continue;
    for (int k = 1; E - k * k * kPiSq >= beta * beta; ++k) {
      const auto sb = sin_lower_bound(E, k, beta, 1.0, 1.0);
      lowest = std::min(lowest, sb.measured);
      zero += !(sb.measured > 0);
    }
  }

  report(5, "resonance_suite", mismatches == 0 && flat && limit_dev <= kStepLimitRel && envelope && zero == 0,
         "nu mismatches " + std::to_string(mismatches) + "/" + std::to_string(kNuTrials) + "; f = 1 on (0, alpha/2] " +
             (flat ? "yes" : "no") + "; max |f/2 - 1| for lambda >= 100 alpha " + g(limit_dev) + "; envelope " +
             (envelope ? "holds" : "violated") + "; min sin constant " + g(lowest));
}

void theorem(const TensorGrid& grid, const std::vector<EigenPair>& pairs, int jobs) {
  BoundConfig cfg;
  cfg.jobs = jobs;
  const BoundReport rep = theorem_sweep(grid, pairs, cfg);
  const double limit = to_double(rep.rho) + kSlopeAllowance;
  report(6, "main_theorem_sweep",
         rep.certified >= kMinPairs && !rep.insufficient && rep.validation <= kValidation && rep.ratio_slope <= limit,
         std::to_string(rep.certified) + " grid-converged pairs (>= 100), " + std::to_string(rep.used) +
             " in Z_0 with c0 = " + g(rep.c0) + "; C_fit = " + g(rep.C_fit) + ", upper-half max ratio / fit " +
             g(rep.validation) + " (<= 1.1); slope " + g(rep.ratio_slope) + " (<= " + g(limit) + ")");
  report(7, "per_term_constants",
         std::abs(rep.large_slope) <= kTermSlopeBand && std::abs(rep.small_slope) <= kTermSlopeBand,
         "Theil-Sen slope of log C vs log E: C_plus " + g(rep.large_slope) + ", C_minus " + g(rep.small_slope) +
             " (within +-0.3); per-mode maxima, not judged: " + g(rep.large_mode_slope) + ", " +
             g(rep.small_mode_slope));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-7"};
  std::string dir = "acceptance";
  int jobs = 0;
  app.add_option("--dir", dir, "Working directory for the eigenpair cache and outputs");
  app.add_option("--jobs", jobs, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  RunConfig rc;
  rc.profile = {{"kind", "truncated-quarter-stadium"}, {"L0", "1"}, {"B0", "2"}, {"truncation_fraction", "0.95"}};
  rc.ns = 590;
  rc.nt = 200;
  rc.window_lo = 200;
  rc.window_hi = 1500;
  rc.out_dir = dir;
  rc.jobs = jobs;

  try {
    exponents();
    solver_oracle();

    (void)cmd_spectrum(rc);
    const EigenCache cache = read_cache(rc.resolved_cache_path());
    std::vector<EigenPair> pairs;
    for (const auto* p : cache.in_window(rc.window_lo, rc.window_hi)) pairs.push_back(*p);
    const TensorGrid grid(rc.build_profile(), rc.ns, rc.nt);

    form_identities(grid, pairs);
    onedim_suite();
    resonance_suite();
    theorem(grid, pairs, rc.resolved_jobs());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
