// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "billiard/adiabatic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "billiard/error.hpp"
#include "billiard/numfmt.hpp"

namespace billiard {

namespace {

constexpr double kPi = 3.14159265358979323846;

// sin(k pi j / nt) with the argument reduced exactly in integers.
Eigen::MatrixXd sine_table(int kmax, int nt) {
  Eigen::MatrixXd S(kmax, nt + 1);
  for (int k = 1; k <= kmax; ++k)
    for (int j = 0; j <= nt; ++j) {
      const long r = (long(k) * j) % (2L * nt);
      S(k - 1, j) = std::sin(kPi * double(r) / double(nt));
    }
  return S;
}

Eigen::MatrixXd cosine_table(int kmax, int nt) {
  Eigen::MatrixXd C(kmax, nt + 1);
  for (int k = 1; k <= kmax; ++k)
    for (int j = 0; j <= nt; ++j) {
      const long r = (long(k) * j) % (2L * nt);
      C(k - 1, j) = std::cos(kPi * double(r) / double(nt));
    }
  return C;
}

// Width at the two Gauss abscissae of every s-cell.
struct CellWidths {
  std::vector<std::array<double, 2>> L;
};

CellWidths cell_widths(const TensorGrid& grid) {
  CellWidths w;
  w.L.resize(std::size_t(grid.ns()));
  for (int i = 0; i < grid.ns(); ++i) {
    for (int a = 0; a < 2; ++a) {
      const double s = grid.s(i) + TensorGrid::kGauss[a] * (grid.s(i + 1) - grid.s(i));
      w.L[std::size_t(i)][std::size_t(a)] = grid.profile().width(s);
    }
  }
  return w;
}

// One-dimensional P1 integrals of nodal functions over cells [0, end).
struct SIntegrals {
  double stiff_L = 0.0;    // ∫ f'^2 L
  double mass_L = 0.0;     // ∫ f^2 L
  double mass_invL = 0.0;  // ∫ f^2 / L
  double mass = 0.0;       // ∫ f^2
  double stiff = 0.0;      // ∫ f'^2
};

SIntegrals s_integrals(const TensorGrid& grid, const CellWidths& w, const double* f, int begin,
                       int end) {
  SIntegrals out;
  for (int i = begin; i < end; ++i) {
    const double hs = grid.s(i + 1) - grid.s(i);
    const double f0 = f[i];
    const double f1 = f[i + 1];
    const double d = (f1 - f0) / hs;
    for (int a = 0; a < 2; ++a) {
      const double g = TensorGrid::kGauss[std::size_t(a)];
      const double v = f0 + g * (f1 - f0);
      const double L = w.L[std::size_t(i)][std::size_t(a)];
      const double wt = 0.5 * hs;
      out.stiff_L += wt * d * d * L;
      out.mass_L += wt * v * v * L;
      out.mass_invL += wt * v * v / L;
      out.mass += wt * v * v;
      out.stiff += wt * d * d;
    }
  }
  return out;
}

int snapped_end(const TensorGrid& grid, double b, double* snapped, double* distance) {
  const auto snap = grid.snap_s(b);
  require(snap.index > 0, ErrorKind::EmptyRegion, "b = " + fmt15(b) + " leaves no cells in Omega_b");
  if (snapped != nullptr) *snapped = snap.value;
  if (distance != nullptr) *distance = snap.distance;
  return snap.index;
}

// Nodal derivatives by centered differences, one-sided on the boundary.
double d_s(const TensorGrid& grid, const Vector& U, int i, int j) {
  if (i == 0) return (grid.value(U, 1, j) - grid.value(U, 0, j)) / (grid.s(1) - grid.s(0));
  if (i == grid.ns())
    return (grid.value(U, i, j) - grid.value(U, i - 1, j)) / (grid.s(i) - grid.s(i - 1));
  return (grid.value(U, i + 1, j) - grid.value(U, i - 1, j)) / (grid.s(i + 1) - grid.s(i - 1));
}

double d_t(const TensorGrid& grid, const Vector& U, int i, int j) {
  const double ht = grid.ht();
  if (j == 0) return (grid.value(U, i, 1) - grid.value(U, i, 0)) / ht;
  if (j == grid.nt()) return (grid.value(U, i, j) - grid.value(U, i, j - 1)) / ht;
  return (grid.value(U, i, j + 1) - grid.value(U, i, j - 1)) / (2.0 * ht);
}

}  // namespace

int large_mode_threshold(double E, double L0) {
  require(E > 0.0 && L0 > 0.0, ErrorKind::Parameter, "threshold needs E > 0 and L0 > 0");
  const double target = 2.0 * E;
  auto large = [&](long k) { return double(k * k) * kPi * kPi / (L0 * L0) >= target; };
  long k = std::max(1L, long(std::ceil(L0 * std::sqrt(target) / kPi)));
  while (k > 1 && large(k - 1)) --k;
  while (!large(k)) ++k;
  return int(k);
}

double mass_symbol(int k, int nt) { return (2.0 + std::cos(kPi * double(k) / double(nt))) / 6.0; }

double stiffness_symbol(int k, int nt) {
  const double ht = 1.0 / double(nt);
  // 1 - cos x = 2 sin^2(x/2), which keeps low modes accurate.
  const double h = std::sin(0.5 * kPi * double(k) * ht);
  return 2.0 * h * h / (ht * ht);
}

int default_kmax(const TensorGrid& grid, double E) {
  const int kstar = large_mode_threshold(E, grid.profile().L0());
  return std::min(kstar + 20, grid.nt() - 1);
}

ModeDecomposition decompose(const TensorGrid& grid, const Vector& U, double E, int kmax) {
  require(U.size() == grid.num_dofs(), ErrorKind::Parameter, "vector size does not match the grid");
  const int nt = grid.nt();
  const int ns = grid.ns();
  const int kstar = large_mode_threshold(E, grid.profile().L0());
  require(kmax >= kstar + 5, ErrorKind::Parameter,
          "kmax = " + std::to_string(kmax) + " is too small; need at least k* + 5 = " +
              std::to_string(kstar + 5));
  require(kmax <= nt - 1, ErrorKind::Parameter,
          "kmax = " + std::to_string(kmax) + " exceeds the nt - 1 = " + std::to_string(nt - 1) +
              " modes the grid carries");

  const int nmodes = nt - 1;
  const Eigen::MatrixXd S = sine_table(nmodes, nt);
  // Nodal values, s-node by t-node, boundary included.
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(nt + 1, ns + 1);
  for (int i = 1; i < ns; ++i)
    for (int j = 1; j < nt; ++j) values(j, i) = U[grid.dof(i, j)];
  const Eigen::MatrixXd all = (2.0 / double(nt)) * (S * values);

  ModeDecomposition d;
  d.E = E;
  d.kmax = kmax;
  d.kstar = kstar;
  d.L0 = grid.profile().L0();
  d.s = grid.s_nodes();
  d.coeff = all.topRows(kmax);

  const CellWidths w = cell_widths(grid);
  for (int k = 1; k <= nmodes; ++k) {
    const Eigen::VectorXd row = all.row(k - 1).transpose();
    const double n = mass_symbol(k, nt) * s_integrals(grid, w, row.data(), 0, ns).mass_L;
    d.total_mass += n;
    if (k > kmax) d.tail_mass += n;
  }
  return d;
}

ModeDecomposition decompose(const TensorGrid& grid, const EigenPair& pair, int kmax) {
  return decompose(grid, pair.U, pair.E, kmax);
}

FormValues form_values(const TensorGrid& grid, const Vector& U, const ModeDecomposition& decomp,
                       double b) {
  FormValues out;
  const int end = snapped_end(grid, b, &out.b, &out.snap_distance);
  const RegionIntegrals r = integrate_region(grid, U, U, {0, end});
  out.q = r.q;
  out.a_matrix = r.a;
  out.n_matrix = r.mass;
  const CellWidths w = cell_widths(grid);
  for (int k = 1; k <= decomp.kmax; ++k) {
    const Eigen::VectorXd row = decomp.mode_vector(k);
    const SIntegrals si = s_integrals(grid, w, row.data(), 0, end);
    const double mu = mass_symbol(k, grid.nt());
    out.a_modes += mu * si.stiff_L + stiffness_symbol(k, grid.nt()) * si.mass_invL;
    out.n_modes += mu * si.mass_L;
  }
  return out;
}

double slope_delta(const BilliardProfile& profile, double b) {
  if (b <= 0.0) return 0.0;
  const double bb = std::min(b, profile.B1());
  return profile.slope_sup(bb) + profile.slope_sq_sup(bb);
}

GapFunctional gap_functional(const TensorGrid& grid, const EigenPair& pair, const Vector& v,
                             double b) {
  require(v.size() == grid.num_dofs(), ErrorKind::Parameter, "vector size does not match the grid");
  GapFunctional out;
  const int end = snapped_end(grid, b, &out.b, nullptr);
  for (int i = std::max(end, 1); i < grid.ns(); ++i)
    for (int j = 1; j < grid.nt(); ++j)
      require(v[grid.dof(i, j)] == 0.0, ErrorKind::Parameter,
              "test field is not supported in Omega_b (nonzero at s = " + fmt15(grid.s(i)) + ")");
  const RegionIntegrals uv = integrate_region(grid, pair.U, v, {0, end});
  const RegionIntegrals uu = integrate_region(grid, pair.U, pair.U, {0, end});
  const RegionIntegrals vv = integrate_region(grid, v, v, {0, end});
  out.a_uv = uv.a;
  out.q_uv = uv.q;
  out.n_uv = uv.mass;
  out.lambda = uv.a - uv.q;
  out.quasi_defect = (uv.a - pair.E * uv.mass) - out.lambda;
  out.bound = slope_delta(grid.profile(), out.b) * std::sqrt(uu.q * vv.q);
  // Roundoff allowance: a and q are summed separately.
  out.within_bound = std::abs(out.lambda) <= out.bound * (1.0 + 1e-12) + 1e-12 * std::sqrt(uu.a * vv.a);
  return out;
}

FGData compute_FG(const TensorGrid& grid, const Vector& U, double b, int kmax) {
  require(U.size() == grid.num_dofs(), ErrorKind::Parameter, "vector size does not match the grid");
  const int nt = grid.nt();
  require(kmax >= 1 && kmax <= nt, ErrorKind::Parameter, "kmax must lie in [1, nt]");
  const int i0 = grid.interface_index();
  double snapped = 0.0;
  const int ib = snapped_end(grid, b, &snapped, nullptr);
  require(ib > i0, ErrorKind::EmptyRegion, "b = " + fmt15(b) + " snaps to no wing cells");

  const auto& prof = grid.profile();
  const Eigen::MatrixXd S = sine_table(kmax, nt);
  const Eigen::MatrixXd C = cosine_table(kmax, nt);
  const double ht = grid.ht();
  const int count = ib - i0 + 1;

  FGData out;
  out.b = snapped;
  out.kmax = kmax;
  out.F.resize(kmax, count);
  out.G.resize(kmax, count);
  Eigen::VectorXd fx(nt + 1), gy(nt + 1);
  double sup_L = 0.0;
  for (int c = 0; c < count; ++c) {
    const int i = i0 + c;
    const double s = grid.s(i);
    out.s.push_back(s);
    const double L = prof.width(s);
    const double r = prof.slope(s) / L;
    sup_L = std::max(sup_L, L);
    for (int j = 0; j <= nt; ++j) {
      const double t = grid.t(j);
      const double w = (j == 0 || j == nt) ? 0.5 * ht : ht;
      const double ut = d_t(grid, U, i, j);
      fx[j] = w * t * (d_s(grid, U, i, j) - t * r * ut);
      gy[j] = w * t * ut;
    }
    out.F.col(c) = 2.0 * L * (C * fx);
    out.G.col(c) = 2.0 * (S * gy);
  }
  // Trapezoidal L2(0, b) norms in s.
  for (int k = 0; k < kmax; ++k) {
    for (int c = 0; c + 1 < count; ++c) {
      const double h = out.s[std::size_t(c + 1)] - out.s[std::size_t(c)];
      out.sum_F += 0.5 * h * (out.F(k, c) * out.F(k, c) + out.F(k, c + 1) * out.F(k, c + 1));
      out.sum_G += 0.5 * h * (out.G(k, c) * out.G(k, c) + out.G(k, c + 1) * out.G(k, c + 1));
    }
  }
  const RegionIntegrals wing = integrate_region(grid, U, U, {i0, ib});
  out.dx_norm = wing.dx;
  out.dy_norm = wing.dy;
  out.C_F = out.dx_norm > 0.0 ? out.sum_F / out.dx_norm : 0.0;
  out.C_G = out.dy_norm > 0.0 ? out.sum_G / out.dy_norm : 0.0;
  out.ceiling = 2.0 * sup_L;
  return out;
}

ModeSplit split_modes(const TensorGrid& grid, const ModeDecomposition& decomp) {
  const int nt = grid.nt();
  const int ns = grid.ns();
  require(int(decomp.s.size()) == ns + 1, ErrorKind::Parameter, "decomposition belongs to another grid");
  require(decomp.kmax >= decomp.kstar + 5, ErrorKind::Parameter, "decomposition has kmax < k* + 5");
  const Eigen::MatrixXd S = sine_table(decomp.kmax, nt);
  const int split = std::min(decomp.kstar - 1, decomp.kmax);  // modes 1..split are small

  ModeSplit out;
  out.minus = Vector::Zero(grid.num_dofs());
  out.plus = Vector::Zero(grid.num_dofs());
  for (int i = 1; i < ns; ++i) {
    for (int j = 1; j < nt; ++j) {
      double lo = 0.0, hi = 0.0;
      for (int k = 1; k <= decomp.kmax; ++k) {
        const double v = decomp.coeff(k - 1, i) * S(k - 1, j);
        if (k <= split)
          lo += v;
        else
          hi += v;
      }
      out.minus[grid.dof(i, j)] = lo;
      out.plus[grid.dof(i, j)] = hi;
    }
  }
  const CellWidths w = cell_widths(grid);
  for (int k = 1; k <= decomp.kmax; ++k) {
    const Eigen::VectorXd row = decomp.mode_vector(k);
    const double n = mass_symbol(k, nt) * s_integrals(grid, w, row.data(), 0, ns).mass_L;
    (k <= split ? out.minus_mass : out.plus_mass) += n;
  }
  return out;
}

PlancherelRatio plancherel_ratio(const TensorGrid& grid, const ModeDecomposition& decomp, double b) {
  const int end = snapped_end(grid, b, nullptr, nullptr);
  const CellWidths w = cell_widths(grid);
  double plain = 0.0, weighted = 0.0;
  for (int k = 1; k <= decomp.kmax; ++k) {
    const Eigen::VectorXd row = decomp.mode_vector(k);
    const SIntegrals si = s_integrals(grid, w, row.data(), 0, end);
    plain += si.mass;
    weighted += mass_symbol(k, grid.nt()) * si.mass_L;
  }
  PlancherelRatio out;
  out.ratio = weighted > 0.0 ? plain / weighted : 0.0;
  out.lower = 2.0 / grid.profile().L0();
  out.upper = 1.0 / (mass_symbol(decomp.kmax, grid.nt()) * grid.profile().width(grid.snap_s(b).value));
  return out;
}

double mode_form(const TensorGrid& grid, const std::vector<double>& f, int k, double b) {
  require(int(f.size()) == grid.ns() + 1, ErrorKind::Parameter, "function must live on the s-nodes");
  const int end = snapped_end(grid, b, nullptr, nullptr);
  const SIntegrals si = s_integrals(grid, cell_widths(grid), f.data(), 0, end);
  return 0.5 * si.stiff_L + 0.5 * double(k) * double(k) * kPi * kPi * si.mass_invL;
}

double h1_norm_sq(const TensorGrid& grid, const std::vector<double>& f, double b) {
  require(int(f.size()) == grid.ns() + 1, ErrorKind::Parameter, "function must live on the s-nodes");
  const int end = snapped_end(grid, b, nullptr, nullptr);
  const SIntegrals si = s_integrals(grid, cell_widths(grid), f.data(), 0, end);
  return si.stiff + si.mass;
}

std::string modes_csv(const ModeDecomposition& decomp) {
  std::ostringstream os;
  os << "s,k,value\n";
  for (int k = 1; k <= decomp.kmax; ++k)
    for (std::size_t i = 0; i < decomp.s.size(); ++i)
      os << fmt15(decomp.s[i]) << ',' << k << ',' << fmt15(decomp.coeff(k - 1, Eigen::Index(i))) << '\n';
  return os.str();
}

std::string fg_csv(const FGData& fg) {
  std::ostringstream os;
  os << "s,k,F_k,G_k\n";
  for (int k = 1; k <= fg.kmax; ++k)
    for (std::size_t i = 0; i < fg.s.size(); ++i)
      os << fmt15(fg.s[i]) << ',' << k << ',' << fmt15(fg.F(k - 1, Eigen::Index(i))) << ','
         << fmt15(fg.G(k - 1, Eigen::Index(i))) << '\n';
  return os.str();
}

}  // namespace billiard
