// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "billiard/onedim.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "billiard/error.hpp"
#include "billiard/numfmt.hpp"

namespace billiard {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sinc(double t) {
  if (std::abs(t) < 1e-4) return 1.0 - t * t / 6.0;
  return std::sin(t) / t;
}

double sinhc(double t) {
  if (std::abs(t) < 1e-4) return 1.0 + t * t / 6.0;
  return std::sinh(t) / t;
}

// sinh(t) - t without cancellation.
double sinh_minus_id(double t) {
  if (std::abs(t) < 0.5) {
    double term = t * t * t / 6.0, sum = 0.0;
    for (int n = 1; n < 12; ++n) {
      sum += term;
      term *= t * t / double((2 * n + 2) * (2 * n + 3));
    }
    return sum;
  }
  return std::sinh(t) - t;
}

double simpson(const std::vector<double>& f, double h, bool square) {
  const std::size_t n = f.size() - 1;
  double s = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double v = square ? f[i] * f[i] : f[i];
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * v;
  }
  return s * h / 3.0;
}

// Global node list of the mesh: left nodes 0..nl, then right nodes 1..nr.
std::vector<double> node_positions(const Mesh1D& m) {
  std::vector<double> x;
  x.reserve(std::size_t(m.nodes()));
  for (int i = 0; i <= m.nl(); ++i) x.push_back(m.xl(i));
  for (int j = 1; j <= m.nr(); ++j) x.push_back(m.xr(j));
  return x;
}

// Solves the P1 Dirichlet problem K w = F on the interior nodes and returns w^T F.
double riesz_energy(const std::vector<double>& x, const std::vector<double>& F) {
  const std::size_t n = x.size();
  if (n < 3) return 0.0;
  const std::size_t m = n - 2;
  std::vector<double> diag(m), upper(m), rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double h0 = x[i + 1] - x[i], h1 = x[i + 2] - x[i + 1];
    diag[i] = 1.0 / h0 + 1.0 / h1;
    upper[i] = -1.0 / h1;
    rhs[i] = F[i + 1];
  }
  // Thomas algorithm; K is symmetric positive definite.
  std::vector<double> c(m), d(m);
  c[0] = upper[0] / diag[0];
  d[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < m; ++i) {
    const double den = diag[i] - upper[i - 1] * c[i - 1];
    c[i] = upper[i] / den;
    d[i] = (rhs[i] - upper[i - 1] * d[i - 1]) / den;
  }
  std::vector<double> w(m);
  w[m - 1] = d[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) w[i] = d[i] - c[i] * w[i + 1];
  double e = 0.0;
  for (std::size_t i = 0; i < m; ++i) e += w[i] * rhs[i];
  return std::max(e, 0.0);
}

// Element endpoint values of a field: element e spans global nodes e, e+1.
struct ElementValues {
  double a, c;
};
ElementValues element_values(const Mesh1D& m, const Field1D& f, int e) {
  if (e < m.nl()) return {f.left[std::size_t(e)], f.left[std::size_t(e) + 1]};
  const int j = e - m.nl();
  return {f.right[std::size_t(j)], f.right[std::size_t(j) + 1]};
}

void check_field(const Mesh1D& m, const Field1D& f, const char* name) {
  require(f.left.size() == std::size_t(m.nl() + 1) && f.right.size() == std::size_t(m.nr() + 1),
          ErrorKind::Parameter, std::string(name) + " does not match the mesh");
}

}  // namespace

double sz(double z, double x) {
  if (z > 0) return x * sinc(std::sqrt(z) * x);
  if (z < 0) return x * sinhc(std::sqrt(-z) * x);
  return x;
}

double cz(double z, double x) {
  if (z > 0) return std::cos(std::sqrt(z) * x);
  if (z < 0) return std::cosh(std::sqrt(-z) * x);
  return 1.0;
}

Mesh1D::Mesh1D(double B0, double b, int n_left, int n_right) : B0_(B0), b_(b), nl_(n_left), nr_(n_right) {
  require(B0 > 0 && b > 0, ErrorKind::Parameter, "mesh needs B0 > 0 and b > 0");
  require(n_left >= 2 && n_right >= 2 && n_left % 2 == 0 && n_right % 2 == 0, ErrorKind::Parameter,
          "mesh interval counts must be even and >= 2");
}

Mesh1D Mesh1D::with_density(double B0, double b, int per_unit, int min_right) {
  auto even_up = [](double v) {
    int n = int(std::ceil(v - 1e-9));
    return n + (n % 2);
  };
  const int nr = std::max(even_up(per_unit * b), even_up(min_right));
  const int nl = std::max(even_up(per_unit * B0), even_up(B0 / (b / nr)));
  return Mesh1D(B0, b, nl, nr);
}

double Mesh1D::xl(int i) const { return i == nl_ ? 0.0 : -B0_ + double(i) * hl(); }
double Mesh1D::xr(int j) const { return j == nr_ ? b_ : double(j) * hr(); }

Field1D sample(const Mesh1D& mesh, const RealFn& f) { return sample_split(mesh, f, f); }

Field1D sample_split(const Mesh1D& mesh, const RealFn& f_left, const RealFn& f_right) {
  Field1D out;
  out.left.resize(std::size_t(mesh.nl() + 1));
  out.right.resize(std::size_t(mesh.nr() + 1));
  for (int i = 0; i <= mesh.nl(); ++i) out.left[std::size_t(i)] = f_left(mesh.xl(i));
  for (int j = 0; j <= mesh.nr(); ++j) out.right[std::size_t(j)] = f_right(mesh.xr(j));
  return out;
}

double l2_left(const Mesh1D& mesh, const Field1D& f) {
  check_field(mesh, f, "field");
  return std::sqrt(std::max(simpson(f.left, mesh.hl(), true), 0.0));
}

double l2_right(const Mesh1D& mesh, const Field1D& f) {
  check_field(mesh, f, "field");
  return std::sqrt(std::max(simpson(f.right, mesh.hr(), true), 0.0));
}

double hminus1_norm(const Mesh1D& mesh, const Field1D& f0, const Field1D& f1) {
  check_field(mesh, f0, "f0");
  check_field(mesh, f1, "f1");
  const auto x = node_positions(mesh);
  std::vector<double> F(x.size(), 0.0);
  for (int e = 0; e + 1 < int(x.size()); ++e) {
    const double h = x[std::size_t(e) + 1] - x[std::size_t(e)];
    const auto [a0, c0] = element_values(mesh, f0, e);
    const auto [a1, c1] = element_values(mesh, f1, e);
    // int f0 phi and -int f1 phi' with phi the two hat functions.
    F[std::size_t(e)] += h * (2.0 * a0 + c0) / 6.0 + 0.5 * (a1 + c1);
    F[std::size_t(e) + 1] += h * (a0 + 2.0 * c0) / 6.0 - 0.5 * (a1 + c1);
  }
  return std::sqrt(riesz_energy(x, F));
}

double hminus1_norm(const Mesh1D& mesh, const RealFn& density) {
  static constexpr double gx[3] = {-0.77459666924148337704, 0.0, 0.77459666924148337704};
  static constexpr double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const auto x = node_positions(mesh);
  std::vector<double> F(x.size(), 0.0);
  for (std::size_t e = 0; e + 1 < x.size(); ++e) {
    const double h = x[e + 1] - x[e];
    for (int q = 0; q < 3; ++q) {
      const double t = 0.5 * (1.0 + gx[q]);
      const double f = density(x[e] + t * h) * gw[q] * 0.5 * h;
      F[e] += f * (1.0 - t);
      F[e + 1] += f * t;
    }
  }
  return std::sqrt(riesz_energy(x, F));
}

AntiderivativeNorm hminus1_from_antiderivative(const Mesh1D& mesh, const Field1D& H) {
  check_field(mesh, H, "H");
  for (double v : H.left)
    require(v == 0.0, ErrorKind::Precondition, "H must vanish on (-B0, 0)");
  AntiderivativeNorm out;
  Field1D zero{std::vector<double>(H.left.size(), 0.0), std::vector<double>(H.right.size(), 0.0)};
  out.h_norm = hminus1_norm(mesh, zero, H);
  // Exact L^2 norm of the piecewise-linear interpolant.
  double s = 0.0;
  for (int j = 0; j < mesh.nr(); ++j) {
    const double a = H.right[std::size_t(j)], c = H.right[std::size_t(j) + 1];
    s += mesh.hr() * (a * a + a * c + c * c) / 3.0;
  }
  out.H_norm = std::sqrt(s);
  out.bound = out.h_norm / (1.0 + std::sqrt(mesh.b()));
  out.holds = out.H_norm >= out.bound * (1.0 - 1e-12);
  return out;
}

GreenFunction::GreenFunction(double z, double B0, double b) : z_(z), B0_(B0), b_(b) {
  require(B0 > 0 && b > 0, ErrorKind::Parameter, "Green function needs B0 > 0 and b > 0");
  if (z > 0 && std::sqrt(z) * b >= kPi) {
    fail(ErrorKind::Regime, "sqrt(z) b = " + fmt15(std::sqrt(z) * b) +
                                " >= pi: sin(sqrt(z) b) may vanish and G is not defined");
  }
}

double GreenFunction::operator()(double x) const {
  if (x <= 0) return sz(z_, x + B0_) * sz(z_, b_);
  return sz(z_, b_ - x) * sz(z_, B0_);
}

double GreenFunction::derivative(double x, bool right_side) const {
  if (!right_side) return cz(z_, x + B0_) * sz(z_, b_);
  return -cz(z_, b_ - x) * sz(z_, B0_);
}

double GreenFunction::jump() const { return -sz(z_, B0_ + b_); }

double green_ratio(const GreenFunction& g, const Mesh1D& mesh) {
  const Field1D f = sample(mesh, [&](double x) { return g(x); });
  return l2_left(mesh, f) * std::sqrt(mesh.b()) / l2_right(mesh, f);
}

FourierParticular vp_fourier(const Mesh1D& mesh, const std::vector<double>& h_right, double z,
                             double eps_hat) {
  const double b = mesh.b();
  const int n = mesh.nr();
  require(h_right.size() == std::size_t(n + 1), ErrorKind::Parameter, "h does not match the right mesh");
  require(eps_hat > 0 && eps_hat < 1, ErrorKind::Parameter, "eps_hat must lie in (0, 1)");
  const double zmax = (1.0 - eps_hat) * kPi * kPi / (b * b);
  if (z > zmax) {
    fail(ErrorKind::Regime, "z = " + fmt15(z) + " exceeds (1 - eps_hat) pi^2 / b^2 = " + fmt15(zmax));
  }
  // Trapezoid sine coefficients (discrete sine transform of the nodal values).
  std::vector<double> coef(std::size_t(n), 0.0);
  for (int k = 1; k < n; ++k) {
    double s = 0.0;
    for (int j = 1; j < n; ++j) s += h_right[std::size_t(j)] * std::sin(kPi * k * j / n);
    coef[std::size_t(k)] = 2.0 * s / n / (double(k) * k * kPi * kPi / (b * b) - z);
  }
  FourierParticular out;
  out.v.assign(std::size_t(n + 1), 0.0);
  for (int j = 1; j < n; ++j) {
    double s = 0.0;
    for (int k = 1; k < n; ++k) s += coef[std::size_t(k)] * std::sin(kPi * k * j / n);
    out.v[std::size_t(j)] = s;
  }
  out.v_l2 = std::sqrt(simpson(out.v, mesh.hr(), true));
  Field1D f0{std::vector<double>(std::size_t(mesh.nl() + 1), 0.0), h_right};
  Field1D f1{std::vector<double>(std::size_t(mesh.nl() + 1), 0.0), std::vector<double>(std::size_t(n + 1), 0.0)};
  out.h_hminus1 = hminus1_norm(mesh, f0, f1);
  out.ratio = out.h_hminus1 > 0 ? out.v_l2 / (b * out.h_hminus1) : 0.0;
  return out;
}

DuhamelParticular vp_duhamel(const Mesh1D& mesh, const Field1D& H, double lambda) {
  check_field(mesh, H, "H");
  const double b = mesh.b();
  require(lambda > 0, ErrorKind::Parameter, "lambda must be positive");
  if (lambda * lambda * b * b < 1.0 * (1.0 - 1e-12)) {
    fail(ErrorKind::Regime, "lambda^2 = " + fmt15(lambda * lambda) + " < 1/b^2 = " + fmt15(1.0 / (b * b)));
  }
  for (double v : H.left)
    require(v == 0.0, ErrorKind::Precondition, "H must vanish on (-B0, 0)");

  // int_0^1 e^{i theta t} dt and int_0^1 t e^{i theta t} dt.
  using cd = std::complex<double>;
  auto moments = [](double theta) {
    const cd it(0.0, theta);
    cd i0, i1;
    if (std::abs(theta) < 0.5) {
      cd p(1.0, 0.0);
      double fact = 1.0;
      for (int n = 0; n < 18; ++n) {
        i0 += p / (fact * (n + 1));
        i1 += p / (fact * (n + 2));
        p *= it;
        fact *= (n + 1);
      }
    } else {
      const cd e = std::exp(it);
      i0 = (e - 1.0) / it;
      i1 = e / it + (e - 1.0) / (theta * theta);
    }
    return std::pair{i0, i1};
  };

  const double h = mesh.hr();
  const auto [i0, i1] = moments(lambda * h);
  DuhamelParticular out;
  out.v.left.assign(H.left.size(), 0.0);
  out.v.right.assign(H.right.size(), 0.0);
  cd acc(0.0, 0.0);  // int_0^x e^{i lambda y} H(y) dy
  double h2 = 0.0;
  for (int j = 0; j < mesh.nr(); ++j) {
    const double a = H.right[std::size_t(j)], c = H.right[std::size_t(j) + 1];
    acc += std::exp(cd(0.0, lambda * mesh.xr(j))) * h * (a * (i0 - i1) + c * i1);
    h2 += h * (a * a + a * c + c * c) / 3.0;
    const double x = mesh.xr(j + 1);
    out.v.right[std::size_t(j) + 1] = std::cos(lambda * x) * acc.real() + std::sin(lambda * x) * acc.imag();
  }
  out.H_l2 = std::sqrt(h2);
  out.v_right_l2 = std::sqrt(simpson(out.v.right, h, true));
  for (double v : out.v.left) out.left_max = std::max(out.left_max, std::abs(v));
  for (int j = 1; j <= mesh.nr(); ++j) {
    const double env = out.H_l2 * std::sqrt(mesh.xr(j));
    if (env > 0) out.envelope_ratio = std::max(out.envelope_ratio, std::abs(out.v.right[std::size_t(j)]) / env);
  }
  out.envelope_ok = out.envelope_ratio <= 1.0 + 1e-12 && out.v_right_l2 <= b * out.H_l2 * (1.0 + 1e-9);
  return out;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Low: return "z<=beta^2";
    case Regime::Middle: return "beta^2<=z<=1/b^2";
    case Regime::High: return "z>=1/b^2";
  }
  return "?";
}

Regime classify(double z, double b, double beta) {
  if (z <= beta * beta) return Regime::Low;
  if (z < 1.0 / (b * b)) return Regime::Middle;
  return Regime::High;
}

ControlReport verify_control(const ModeProblem& p, const RealFn& u, double beta) {
  const Mesh1D& m = p.mesh;
  const double B0 = m.B0(), b = m.b(), z = p.z;
  require(beta > 0, ErrorKind::Parameter, "beta must be positive");
  require(m.nr() >= 32 && m.nl() >= int(std::ceil(64 * B0 - 1e-9)) && m.nr() >= int(std::ceil(64 * b - 1e-9)),
          ErrorKind::Parameter, "mesh needs >= 64 nodes per unit length and >= 32 nodes in (0, b)");

  const Field1D us = sample(m, u);
  double umax = 0.0;
  for (double v : us.left) umax = std::max(umax, std::abs(v));
  for (double v : us.right) umax = std::max(umax, std::abs(v));
  if (std::abs(u(-B0)) > 1e-12 * std::max(umax, 1e-300)) {
    fail(ErrorKind::Precondition, "u(-B0) = " + fmt15(u(-B0)) + " is not 0");
  }
  for (int i = 0; i < m.nl(); ++i)
    require(p.h(m.xl(i)) == 0.0, ErrorKind::Precondition, "h must vanish on (-B0, 0)");

  // Fourth-order residual at the mesh nodes, stencil kept inside one side.
  const double omega = std::max({p.omega_max, std::sqrt(std::abs(z)), 1.0});
  const double d = std::min({0.02 / omega, m.hl() / 2, m.hr() / 2});
  double res = 0.0, scale = 0.0;
  auto probe = [&](double x) {
    const double u2 = (-u(x - 2 * d) + 16 * u(x - d) - 30 * u(x) + 16 * u(x + d) - u(x + 2 * d)) / (12 * d * d);
    const double hx = x > 0 ? p.h(x) : 0.0;
    res = std::max(res, std::abs(-u2 - z * u(x) - hx));
    scale = std::max(scale, std::abs(u2) + std::abs(z * u(x)) + std::abs(hx));
  };
  for (int i = 1; i < m.nl(); ++i) probe(m.xl(i));
  for (int j = 1; j < m.nr(); ++j) probe(m.xr(j));
  ControlReport r;
  r.residual = scale > 0 ? res / scale : 0.0;
  if (r.residual > 1e-6) {
    fail(ErrorKind::NotASolution, "scaled residual " + fmt15(r.residual) + " exceeds 1e-6");
  }

  r.z = z;
  r.b = b;
  r.B0 = B0;
  r.beta = beta;
  r.regime = classify(z, b, beta);
  r.u_left = l2_left(m, us);
  r.u_right = l2_right(m, us);
  r.h_hminus1 = hminus1_norm(m, p.h);
  if (r.regime == Regime::Middle) {
    r.sin_factor = std::abs(std::sin(B0 * std::sqrt(z)));
    if (r.sin_factor < 1e-12) {
      r.excluded = true;
      r.constant = std::nan("");
      return r;
    }
  }
  r.rhs = (std::sqrt(b) * r.h_hminus1 + r.u_right / std::sqrt(b)) / r.sin_factor;
  r.constant = r.rhs > 0 ? r.u_left / r.rhs : 0.0;
  return r;
}

ManufacturedSolution::ManufacturedSolution(double B0, double b, double z, double A, std::vector<double> cos_coeffs)
    : B0_(B0), b_(b), z_(z), A_(A), a_(std::move(cos_coeffs)) {
  require(B0 > 0 && b > 0, ErrorKind::Parameter, "manufactured solution needs B0 > 0 and b > 0");
  // sin^4 t cos(j t) = [3 cos jt - 2 cos (j+2)t - 2 cos (j-2)t + cos (j+4)t / 2 + cos (j-4)t / 2] / 8
  std::map<int, double> c;
  for (std::size_t j = 0; j < a_.size(); ++j) {
    const int jj = int(j);
    c[jj] += 3.0 / 8.0 * a_[j];
    c[std::abs(jj + 2)] -= 2.0 / 8.0 * a_[j];
    c[std::abs(jj - 2)] -= 2.0 / 8.0 * a_[j];
    c[std::abs(jj + 4)] += 0.5 / 8.0 * a_[j];
    c[std::abs(jj - 4)] += 0.5 / 8.0 * a_[j];
  }
  for (const auto& [m, v] : c)
    if (v != 0.0) freq_.emplace_back(m * kPi / b, v);
}

ManufacturedSolution ManufacturedSolution::random(double B0, double b, double z, std::mt19937_64& rng, int terms) {
  std::normal_distribution<double> nd;
  const double A = nd(rng);
  std::vector<double> a(std::size_t(std::max(terms, 1)));
  for (auto& v : a) v = nd(rng);
  return ManufacturedSolution(B0, b, z, A, std::move(a));
}

double ManufacturedSolution::h(double x) const {
  if (x <= 0 || x >= b_) return 0.0;
  double s = 0.0;
  for (const auto& [w, c] : freq_) s += c * std::cos(w * x);
  return s;
}

double ManufacturedSolution::u(double x) const {
  double v = A_ * sz(z_, x + B0_);
  if (x <= 0) return v;
  // Zero-data solution of -D'' - z D = cos(w x):
  // D = (cos w x - cz(x)) / (w^2 - z), written without cancellation.
  const double xx = std::min(x, b_);
  for (const auto& [w, c] : freq_) {
    double D;
    if (z_ >= 0) {
      const double l = std::sqrt(z_);
      D = -0.5 * xx * xx * sinc(0.5 * (w + l) * xx) * sinc(0.5 * (w - l) * xx);
    } else {
      D = (std::cos(w * xx) - std::cosh(std::sqrt(-z_) * xx)) / (w * w - z_);
    }
    v += c * D;
  }
  return v;
}

double ManufacturedSolution::omega_max() const {
  double w = std::sqrt(std::abs(z_));
  for (const auto& f : freq_) w = std::max(w, f.first);
  return w;
}

ModeProblem ManufacturedSolution::problem(const Mesh1D& mesh) const {
  require(std::abs(mesh.B0() - B0_) < 1e-15 && std::abs(mesh.b() - b_) < 1e-15, ErrorKind::Parameter,
          "mesh does not match the manufactured solution");
  ManufacturedSolution copy = *this;
  return ModeProblem{z_, [copy](double x) { return copy.h(x); }, omega_max(), mesh};
}

namespace {

// int_0^a sinh^2(w s) ds.
double sinh_sq_integral(double w, double a) {
  if (w == 0.0) return a * a * a / 3.0;
  return sinh_minus_id(2.0 * w * a) / (4.0 * w);
}

ConvexityResult finish(double lhs, double rhs) {
  ConvexityResult r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs > 0 ? (rhs - lhs) / rhs : -std::numeric_limits<double>::infinity();
  r.holds = lhs <= rhs * (1.0 + 1e-12);
  return r;
}

void check_b(double B0, double b, double b0) {
  require(B0 > 0 && b > 0 && b0 > 0, ErrorKind::Parameter, "convexity check needs positive B0, b, b0");
  require(b <= b0, ErrorKind::Parameter, "convexity check needs b <= b0");
}

}  // namespace

ConvexityResult convexity_check(double omega, double B0, double b, double b0) {
  check_b(B0, b, b0);
  require(omega >= 0, ErrorKind::Parameter, "omega must be non-negative");
  if (omega == 0.0) {
    const double all = std::pow(B0 + b, 3) / 3.0;
    const double right = (std::pow(B0 + b, 3) - std::pow(B0, 3)) / 3.0;
    return finish(b * all, (B0 + b0) * right);
  }
  // Work with w / sinh(omega (B0 + b)) to stay finite for large omega.
  const double T = omega * (B0 + b);
  const double all = sinh_sq_integral(omega, B0 + b);
  const double left = sinh_sq_integral(omega, B0);
  if (T < 300) return finish(b * all, (B0 + b0) * (all - left));
  // Both integrals divided by e^{2T}/4.
  const double scaled_all = 1.0 / (2.0 * omega) - 2.0 * T * std::exp(-2.0 * T) / omega;
  const double scaled_left = std::exp(-2.0 * omega * b) / (2.0 * omega);
  return finish(b * scaled_all, (B0 + b0) * (scaled_all - scaled_left));
}

ConvexityResult convexity_check(const Mesh1D& mesh, const Field1D& w, double b0) {
  check_field(mesh, w, "w");
  check_b(mesh.B0(), mesh.b(), b0);
  double wmax = 0.0;
  for (double v : w.left) wmax = std::max(wmax, std::abs(v));
  for (double v : w.right) wmax = std::max(wmax, std::abs(v));
  if (std::abs(w.left.front()) > 1e-12 * std::max(wmax, 1e-300))
    fail(ErrorKind::Precondition, "w(-B0) = " + fmt15(w.left.front()) + " is not 0");
  const double left = simpson(w.left, mesh.hl(), true);
  const double right = simpson(w.right, mesh.hr(), true);
  return finish(mesh.b() * (left + right), (mesh.B0() + b0) * right);
}

ConvexityResult convexity_check(const BilliardProfile& profile, int k, double E, double b, double b0,
                                int steps_per_unit) {
  const double B0 = profile.B0(), L0 = profile.L0();
  check_b(B0, b, b0);
  require(b <= profile.B1(), ErrorKind::Parameter, "b exceeds B1");
  require(k >= 1 && E > 0, ErrorKind::Parameter, "convexity check needs k >= 1 and E > 0");
  const double gap = double(k) * k * kPi * kPi / (L0 * L0) - E;
  if (gap < E) {
    fail(ErrorKind::Regime, "k = " + std::to_string(k) + " is not a large mode at E = " + fmt15(E));
  }
  auto V = [&](double x) {
    const double L = profile.width(x);
    return double(k) * k * kPi * kPi / (L * L) - E;
  };
  // Integrates w'' = V w over [x0, x1] with n (even) RK4 steps, Simpson for int w^2.
  double w = 0.0, dw = 1.0;
  double left = 0.0, right = 0.0;
  auto run = [&](double x0, double x1, double& integral) {
    const double vmax = std::max(V(x0), V(x1));
    int n = std::max(64, int(std::ceil(steps_per_unit * (x1 - x0))));
    n = std::max(n, int(std::ceil((x1 - x0) * std::sqrt(std::max(vmax, 0.0)) / 0.02)));
    n += n % 2;
    const double h = (x1 - x0) / n;
    double acc = w * w;
    for (int i = 0; i < n; ++i) {
      const double x = x0 + i * h;
      const double k1w = dw, k1d = V(x) * w;
      const double k2w = dw + 0.5 * h * k1d, k2d = V(x + 0.5 * h) * (w + 0.5 * h * k1w);
      const double k3w = dw + 0.5 * h * k2d, k3d = V(x + 0.5 * h) * (w + 0.5 * h * k2w);
      const double k4w = dw + h * k3d, k4d = V(x + h) * (w + h * k3w);
      w += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
      dw += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
      const double wt = (i + 1 == n) ? 1.0 : ((i + 1) % 2 ? 4.0 : 2.0);
      acc += wt * w * w;
      if (std::abs(w) > 1e100) {
        // Rescale the state; integrals so far shrink by the square.
        w *= 1e-100;
        dw *= 1e-100;
        acc *= 1e-200;
        left *= 1e-200;
      }
    }
    integral = acc * h / 3.0;
  };
  run(-B0, 0.0, left);
  run(0.0, b, right);
  return finish(b * (left + right), (B0 + b0) * right);
}

double sinh_ratio_F(double X) {
  require(X > 0, ErrorKind::Parameter, "F(X) needs X > 0");
  if (X > 20) {
    const double q = std::exp(-2.0 * X);
    return (1.0 - q * q - 4.0 * X * q) / (2.0 * (1.0 - q) * (1.0 - q));
  }
  const double s = std::sinh(X);
  return sinh_minus_id(2.0 * X) / (4.0 * s * s);
}

namespace {
double psi(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }
double psi1(double t) { return t > 0 ? psi(t) / (t * t) : 0.0; }
double psi2(double t) { return t > 0 ? psi(t) * (1.0 - 2.0 * t) / (t * t * t * t) : 0.0; }
}  // namespace

double cutoff(double x) {
  if (x <= 0.5) return 1.0;
  if (x >= 1.0) return 0.0;
  const double a = psi(1.0 - x), c = psi(x - 0.5);
  return a / (a + c);
}

double cutoff_d1(double x) {
  if (x <= 0.5 || x >= 1.0) return 0.0;
  const double a = psi(1.0 - x), c = psi(x - 0.5);
  const double da = -psi1(1.0 - x), dc = psi1(x - 0.5);
  const double s = a + c;
  return (da * c - a * dc) / (s * s);
}

double cutoff_d2(double x) {
  if (x <= 0.5 || x >= 1.0) return 0.0;
  const double a = psi(1.0 - x), c = psi(x - 0.5);
  const double da = -psi1(1.0 - x), dc = psi1(x - 0.5);
  const double dda = psi2(1.0 - x), ddc = psi2(x - 0.5);
  const double s = a + c, ds = da + dc;
  const double num = da * c - a * dc;
  const double dnum = dda * c - a * ddc;
  return (dnum * s - 2.0 * num * ds) / (s * s * s);
}

CommutatorReport cutoff_commutator(const Mesh1D& mesh, const Field1D& u) {
  check_field(mesh, u, "u");
  const double b = mesh.b();
  Field1D f0{std::vector<double>(u.left.size(), 0.0), std::vector<double>(u.right.size(), 0.0)};
  Field1D f1 = f0, zero = f0;
  for (int j = 0; j <= mesh.nr(); ++j) {
    const double t = mesh.xr(j) / b;
    f1.right[std::size_t(j)] = 2.0 * cutoff_d1(t) / b * u.right[std::size_t(j)];
    f0.right[std::size_t(j)] = -cutoff_d2(t) / (b * b) * u.right[std::size_t(j)];
  }
  CommutatorReport r;
  r.first = hminus1_norm(mesh, zero, f1);
  r.second = hminus1_norm(mesh, f0, zero);
  r.u_right = l2_right(mesh, u);
  const double ref = r.u_right / b;
  r.first_ratio = ref > 0 ? r.first / ref : 0.0;
  r.second_ratio = ref > 0 ? r.second / ref : 0.0;
  return r;
}

double ZSpec::at(double b, double beta) const {
  switch (kind) {
    case Absolute: return value;
    case BetaSq: return value * beta * beta;
    case InvBSq: return value / (b * b);
  }
  return value;
}

std::string ZSpec::label() const {
  switch (kind) {
    case Absolute: return fmt15(value);
    case BetaSq: return fmt15(value) + "*beta^2";
    case InvBSq: return fmt15(value) + "/b^2";
  }
  return "?";
}

namespace {

// Least-squares slope; `take_log` converts the inputs first.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, bool take_log = false) {
  if (x.size() < 2) return std::nan("");
  std::vector<double> lx(x), ly(y);
  if (take_log) {
    for (auto& v : lx) v = std::log(v);
    for (auto& v : ly) v = std::log(v);
  }
  const double n = double(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
  mx /= n;
  my /= n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num += (lx[i] - mx) * (ly[i] - my);
    den += (lx[i] - mx) * (lx[i] - mx);
  }
  return num / den;
}

}  // namespace

ControlSweep control_sweep(const ControlSweepOptions& opts) {
  require(opts.samples >= 1 && !opts.b_values.empty(), ErrorKind::Parameter, "sweep needs samples and b values");
  ControlSweep out;
  out.beta = opts.beta > 0 ? opts.beta : kPi / (2.0 * opts.B0);
  std::mt19937_64 rng(opts.seed);
  for (const auto& zs : opts.z_specs) {
    std::vector<double> lb, lc;
    std::vector<Regime> regimes;
    for (double b : opts.b_values) {
      const Mesh1D mesh = Mesh1D::with_density(opts.B0, b, opts.per_unit, opts.min_right);
      ControlSweepRow row;
      row.z_label = zs.label();
      row.z = zs.at(b, out.beta);
      row.b = b;
      row.regime = classify(row.z, b, out.beta);
      row.mesh_n = mesh.nodes();
      for (int s = 0; s < opts.samples; ++s) {
        const auto ms = ManufacturedSolution::random(opts.B0, b, row.z, rng, opts.terms);
        const auto rep = verify_control(ms.problem(mesh), [&](double x) { return ms.u(x); }, out.beta);
        row.sin_factor = rep.sin_factor;
        if (rep.excluded) {
          ++row.excluded;
          continue;
        }
        row.constant = std::max(row.constant, rep.constant);
      }
      regimes.push_back(row.regime);
      if (row.constant > 0) {
        lb.push_back(std::log(b));
        lc.push_back(std::log(row.constant));
      }
      out.rows.push_back(row);
    }
    ControlSweepSlope sl;
    sl.z_label = zs.label();
    sl.regime = regimes.front();
    sl.mixed = std::any_of(regimes.begin(), regimes.end(), [&](Regime r) { return r != regimes.front(); });
    sl.slope = loglog_slope(lb, lc);
    out.slopes.push_back(sl);
  }
  for (Regime reg : {Regime::Low, Regime::Middle, Regime::High}) {
    RegimeSlope rs;
    rs.regime = reg;
    for (double b : opts.b_values) {
      double c = 0.0;
      bool any = false;
      for (const auto& row : out.rows)
        if (row.b == b && row.regime == reg && row.constant > 0) {
          c = std::max(c, row.constant);
          any = true;
        }
      if (any) {
        rs.b.push_back(b);
        rs.constant.push_back(c);
      }
    }
    if (rs.b.empty()) continue;
    rs.slope = loglog_slope(rs.b, rs.constant, true);
    out.regimes.push_back(rs);
  }
  return out;
}

std::string control_sweep_csv(const ControlSweep& sweep) {
  std::string s = "z,b,regime,measured_constant,sin_factor,mesh_n\n";
  for (const auto& r : sweep.rows) {
    s += fmt15(r.z) + "," + fmt15(r.b) + "," + to_string(r.regime) + "," + fmt15(r.constant) + "," +
         fmt15(r.sin_factor) + "," + std::to_string(r.mesh_n) + "\n";
  }
  return s;
}

double worst_case_constant(double B0, double b, double z, double beta, int terms, int per_unit, int min_right) {
  require(terms >= 1, ErrorKind::Parameter, "worst case needs at least one term");
  const Mesh1D m = Mesh1D::with_density(B0, b, per_unit, min_right);
  const Regime reg = classify(z, b, beta);
  const double sinf = reg == Regime::Middle ? std::abs(std::sin(B0 * std::sqrt(z))) : 1.0;
  if (sinf < 1e-12) return std::nan("");
  const ManufacturedSolution base(B0, b, z, 1.0, {});
  const double uL = l2_left(m, sample(m, [&](double x) { return base.u(x); }));

  const int n = m.nr();
  std::vector<ManufacturedSolution> basis;
  for (int j = 0; j < terms; ++j) {
    std::vector<double> a(std::size_t(terms), 0.0);
    a[std::size_t(j)] = 1.0;
    basis.emplace_back(B0, b, z, 0.0, std::move(a));
  }
  Eigen::VectorXd s(n + 1), w(n + 1);
  Eigen::MatrixXd D(n + 1, terms);
  for (int i = 0; i <= n; ++i) {
    const double x = m.xr(i);
    s[i] = base.u(x);
    w[i] = m.hr() / 3.0 * ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    for (int j = 0; j < terms; ++j) D(i, j) = basis[std::size_t(j)].u(x);
  }
  // H^{-1} Gram matrix by polarization.
  Eigen::MatrixXd G(terms, terms);
  for (int i = 0; i < terms; ++i)
    for (int j = i; j < terms; ++j) {
      const auto& gi = basis[std::size_t(i)];
      const auto& gj = basis[std::size_t(j)];
      const double p = hminus1_norm(m, [&](double x) { return gi.h(x) + gj.h(x); });
      const double q = hminus1_norm(m, [&](double x) { return gi.h(x) - gj.h(x); });
      G(i, j) = G(j, i) = (p * p - q * q) / 4.0;
    }
  const Eigen::MatrixXd DW = D.transpose() * w.asDiagonal();
  const Eigen::MatrixXd DWD = DW * D;
  const Eigen::VectorXd DWs = DW * s;
  double best = 0.0;
  for (double lt = -8.0; lt <= 8.0; lt += 0.25) {
    const double t = std::exp(lt);
    const Eigen::MatrixXd M = t * b * G + DWD / b;
    const Eigen::VectorXd a = M.ldlt().solve(-DWs / b);
    const Eigen::VectorXd uR = s + D * a;
    const double ur = std::sqrt(std::max(uR.dot(w.asDiagonal() * uR), 0.0));
    const double hh = std::sqrt(std::max(a.dot(G * a), 0.0));
    best = std::max(best, uL * sinf / (std::sqrt(b) * hh + ur / std::sqrt(b)));
  }
  return best;
}

std::vector<RegimeSlope> regime_sup_sweep(double B0, const std::vector<double>& b_values, double beta, int n_z,
                                          int terms) {
  require(n_z >= 2, ErrorKind::Parameter, "regime sweep needs n_z >= 2");
  std::vector<RegimeSlope> out;
  for (Regime reg : {Regime::Low, Regime::Middle, Regime::High}) {
    RegimeSlope rs;
    rs.regime = reg;
    for (double b : b_values) {
      double lo, hi;
      if (reg == Regime::Low) {
        lo = -25.0;
        hi = beta * beta;
      } else if (reg == Regime::Middle) {
        lo = beta * beta * (1.0 + 1e-4);
        hi = (1.0 - 1e-4) / (b * b);
        if (lo >= hi) continue;
      } else {
        lo = 1.0 / (b * b);
        hi = 25.0 / (b * b);
      }
      double c = 0.0;
      for (int i = 0; i <= n_z; ++i) {
        const double v = worst_case_constant(B0, b, lo + (hi - lo) * i / n_z, beta, terms);
        if (std::isfinite(v)) c = std::max(c, v);
      }
      rs.b.push_back(b);
      rs.constant.push_back(c);
    }
    if (rs.b.empty()) continue;
    rs.slope = loglog_slope(rs.b, rs.constant, true);
    out.push_back(rs);
  }
  return out;
}

}  // namespace billiard
