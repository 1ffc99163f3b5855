// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "billiard/geometry.hpp"

namespace billiard {

using RealFn = std::function<double(double)>;

/// sin(sqrt(z) x)/sqrt(z), continued to x at z = 0 and sinh(sqrt(-z) x)/sqrt(-z) for z < 0.
double sz(double z, double x);
/// cos(sqrt(z) x), continued to cosh(sqrt(-z) x) for z < 0.
double cz(double z, double x);

/// Mesh on [-B0, b]: uniform on [-B0, 0] and on [0, b] (spacings may differ),
/// nodes at -B0, 0 and b, even interval counts on both sides.
class Mesh1D {
 public:
  Mesh1D(double B0, double b, int n_left, int n_right);
  /// At least per_unit intervals per unit length and min_right intervals in
  /// (0, b); the left spacing matches the right one when that is finer.
  static Mesh1D with_density(double B0, double b, int per_unit = 64, int min_right = 32);

  double B0() const { return B0_; }
  double b() const { return b_; }
  int nl() const { return nl_; }
  int nr() const { return nr_; }
  double hl() const { return B0_ / nl_; }
  double hr() const { return b_ / nr_; }
  double xl(int i) const;  // i = 0..nl, from -B0 to 0
  double xr(int j) const;  // j = 0..nr, from 0 to b
  int nodes() const { return nl_ + nr_ + 1; }

 private:
  double B0_, b_;
  int nl_, nr_;
};

/// Nodal samples; left[nl] and right[0] are the one-sided values at 0.
struct Field1D {
  std::vector<double> left;
  std::vector<double> right;
};
Field1D sample(const Mesh1D& mesh, const RealFn& f);
Field1D sample_split(const Mesh1D& mesh, const RealFn& f_left, const RealFn& f_right);
double l2_left(const Mesh1D& mesh, const Field1D& f);   // Simpson on [-B0, 0]
double l2_right(const Mesh1D& mesh, const Field1D& f);  // Simpson on [0, b]

/// H^{-1}(-B0, b) norm sup |<h, phi>| / ||phi'|| of h = f0 + f1', computed as
/// ||w'|| for the P1 Riesz representative -w'' = h, w(-B0) = w(b) = 0.
/// Loads use the piecewise-linear interpolants of f0 and f1.
double hminus1_norm(const Mesh1D& mesh, const Field1D& f0, const Field1D& f1);
/// Same for an L^2 density evaluated by 3-point Gauss quadrature per element.
double hminus1_norm(const Mesh1D& mesh, const RealFn& density);

/// h = H' for H in L^2, vanishing on (-B0, 0). Also checks
/// ||H|| >= ||h||_{H^{-1}} / (1 + sqrt(b)).
struct AntiderivativeNorm {
  double h_norm = 0.0;
  double H_norm = 0.0;
  double bound = 0.0;  // ||h|| / (1 + sqrt(b))
  bool holds = false;
};
AntiderivativeNorm hminus1_from_antiderivative(const Mesh1D& mesh, const Field1D& H);

/// G of the homogeneous problem, continuous at 0 and vanishing at -B0 and b.
class GreenFunction {
 public:
  GreenFunction(double z, double B0, double b);
  double operator()(double x) const;
  double derivative(double x, bool right_side) const;
  /// G'(0+) - G'(0-) = -sin(sqrt(z)(B0 + b))/sqrt(z).
  double jump() const;

 private:
  double z_, B0_, b_;
};

/// ||G||_{L^2(-B0,0)} b^{1/2} / ||G||_{L^2(0,b)}.
double green_ratio(const GreenFunction& g, const Mesh1D& mesh);

/// Sine-series particular solution on (0, b) of -v'' - z v = h with
/// v(0) = v(b) = 0. Requires z <= (1 - eps_hat) pi^2 / b^2.
struct FourierParticular {
  std::vector<double> v;  // nodal values on the right mesh
  double v_l2 = 0.0;
  double h_hminus1 = 0.0;  // h extended by zero, H^{-1}(-B0, b)
  double ratio = 0.0;      // ||v|| / (b ||h||)
};
FourierParticular vp_fourier(const Mesh1D& mesh, const std::vector<double>& h_right, double z,
                             double eps_hat = 0.1);

/// v_p(x) = int_{-B0}^x cos(lambda (x - y)) H(y) dy for piecewise-linear H
/// vanishing on (-B0, 0), integrated exactly. Requires lambda^2 >= 1/b^2.
struct DuhamelParticular {
  Field1D v;
  double H_l2 = 0.0;
  double v_right_l2 = 0.0;
  double left_max = 0.0;        // max |v_p| on [-B0, 0]
  double envelope_ratio = 0.0;  // max over x > 0 of |v_p(x)| / (||H|| sqrt(x))
  bool envelope_ok = false;     // envelope_ratio <= 1 and ||v_p||_{(0,b)} <= b ||H||
};
DuhamelParticular vp_duhamel(const Mesh1D& mesh, const Field1D& H, double lambda);

/// -u'' - z u = h on (-B0, b), h a density supported in [0, b].
struct ModeProblem {
  double z = 0.0;
  RealFn h;
  double omega_max = 0.0;  // bound on the frequencies in u and h (sets the residual step)
  Mesh1D mesh;
};

enum class Regime { Low, Middle, High };
std::string to_string(Regime r);
/// z <= beta^2 is Low; otherwise z < 1/b^2 is Middle; otherwise High.
Regime classify(double z, double b, double beta);

struct ControlReport {
  Regime regime = Regime::Low;
  double z = 0.0, b = 0.0, B0 = 0.0, beta = 0.0;
  double u_left = 0.0;      // ||u||_{L^2(-B0,0)}
  double u_right = 0.0;     // ||u||_{L^2(0,b)}
  double h_hminus1 = 0.0;   // ||h||_{H^{-1}(-B0,b)}
  double sin_factor = 1.0;  // |sin(B0 sqrt z)| in the middle regime, else 1
  double rhs = 0.0;         // (b^{1/2} ||h|| + b^{-1/2} ||u||_{(0,b)}) / sin_factor
  double constant = 0.0;    // u_left / rhs
  double residual = 0.0;    // scaled max |-u'' - z u - h|
  bool excluded = false;    // middle regime with sin_factor < 1e-12
};
/// Throws NotASolution when the residual exceeds 1e-6 and Precondition when
/// u(-B0) != 0 or h does not vanish on (-B0, 0).
ControlReport verify_control(const ModeProblem& problem, const RealFn& u, double beta);

/// u = A S_z(x + B0) + (Duhamel term of g), g(x) = sin^4(pi x/b) sum_j a_j cos(j pi x/b)
/// on (0, b) and 0 elsewhere, so -u'' - z u = g and u(-B0) = 0.
class ManufacturedSolution {
 public:
  ManufacturedSolution(double B0, double b, double z, double A, std::vector<double> cos_coeffs);
  /// A and the a_j standard normal, j = 0..terms-1.
  static ManufacturedSolution random(double B0, double b, double z, std::mt19937_64& rng, int terms = 4);

  double u(double x) const;
  double h(double x) const;
  double omega_max() const;
  ModeProblem problem(const Mesh1D& mesh) const;

 private:
  double B0_, b_, z_, A_;
  std::vector<double> a_;
  std::vector<std::pair<double, double>> freq_;  // (omega, coefficient) of g on (0, b)
};

/// Integrals for b int_{-B0}^b w^2 <= (B0 + b0) int_0^b w^2.
struct ConvexityResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // (rhs - lhs) / rhs
  bool holds = false;
};
/// w = sinh(omega (x + B0)) in closed form (omega = 0 means w = x + B0).
ConvexityResult convexity_check(double omega, double B0, double b, double b0);
/// Sampled w; requires w(-B0) = 0.
ConvexityResult convexity_check(const Mesh1D& mesh, const Field1D& w, double b0);
/// w'' = (k^2 pi^2 / L(x)^2 - E) w, w(-B0) = 0, w'(-B0) = 1, by RK4. Requires
/// k^2 pi^2 / L0^2 - E >= E.
ConvexityResult convexity_check(const BilliardProfile& profile, int k, double E, double b, double b0,
                                int steps_per_unit = 4096);

/// F(X) = int_0^X sinh^2 / sinh^2(X).
double sinh_ratio_F(double X);

/// rho_1 = 1 on x <= 1/2, 0 on x >= 1, psi(1-x)/(psi(1-x)+psi(x-1/2)) between,
/// psi(t) = exp(-1/t).
double cutoff(double x);
double cutoff_d1(double x);
double cutoff_d2(double x);

/// H^{-1} norms of 2(rho_b' u)' and rho_b'' u, and their ratios to b^{-1} ||u||_{L^2(0,b)}.
struct CommutatorReport {
  double first = 0.0;
  double second = 0.0;
  double u_right = 0.0;
  double first_ratio = 0.0;
  double second_ratio = 0.0;
};
CommutatorReport cutoff_commutator(const Mesh1D& mesh, const Field1D& u);

/// z per sweep cell: value, value * beta^2 or value / b^2.
struct ZSpec {
  enum Kind { Absolute, BetaSq, InvBSq } kind = Absolute;
  double value = 0.0;
  double at(double b, double beta) const;
  std::string label() const;
};

struct ControlSweepOptions {
  double B0 = 1.0;
  double beta = 0.0;  // 0 selects pi / (2 B0)
  std::vector<double> b_values{0.05, 0.1, 0.2};
  std::vector<ZSpec> z_specs{{ZSpec::Absolute, -25.0}, {ZSpec::Absolute, -1.0}, {ZSpec::BetaSq, 0.5},
                             {ZSpec::InvBSq, 0.5},     {ZSpec::InvBSq, 4.0},    {ZSpec::InvBSq, 25.0}};
  int samples = 50;
  int terms = 4;
  int per_unit = 64;
  int min_right = 128;
  std::uint64_t seed = 20240611;
};

struct ControlSweepRow {
  std::string z_label;
  double z = 0.0, b = 0.0;
  Regime regime = Regime::Low;
  double constant = 0.0;  // max over the samples
  double sin_factor = 1.0;
  int mesh_n = 0;
  int excluded = 0;
};

struct ControlSweepSlope {
  std::string z_label;
  Regime regime = Regime::Low;
  double slope = 0.0;  // least-squares slope of log constant vs log b
  bool mixed = false;  // the z spec crosses regimes over the b values
};

struct RegimeSlope {
  Regime regime = Regime::Low;
  std::vector<double> b;
  std::vector<double> constant;  // max over every z of the regime at this b
  double slope = 0.0;
};

struct ControlSweep {
  double beta = 0.0;
  std::vector<ControlSweepRow> rows;
  std::vector<ControlSweepSlope> slopes;  // one per z spec
  std::vector<RegimeSlope> regimes;       // pooled over the z specs of each regime
};
ControlSweep control_sweep(const ControlSweepOptions& opts);
std::string control_sweep_csv(const ControlSweep& sweep);

/// Largest control ratio over the manufactured family with `terms` cosine
/// terms: A = 1 fixed, the a_j minimize t b ||h||^2 + ||u||^2_{(0,b)} / b
/// (least squares, scanned over t), and the exact ratio is evaluated.
double worst_case_constant(double B0, double b, double z, double beta, int terms = 4,
                           int per_unit = 64, int min_right = 128);

/// Sup of worst_case_constant over n_z evenly spaced z in each regime
/// (Low: [-25, beta^2], Middle: (beta^2, 1/b^2), High: [1/b^2, 25/b^2]).
std::vector<RegimeSlope> regime_sup_sweep(double B0, const std::vector<double>& b_values, double beta,
                                          int n_z = 200, int terms = 2);

}  // namespace billiard
