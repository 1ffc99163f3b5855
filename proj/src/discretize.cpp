// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "billiard/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "billiard/error.hpp"

namespace billiard {

namespace {

// Ratio test for the interface lying on an s-node.
bool interface_on_node(double B0, double B1, int ns, int* index) {
  const double pos = double(ns) * B0 / (B0 + B1);
  const double rounded = std::round(pos);
  if (std::abs(pos - rounded) > 1e-9 * std::max(1.0, pos)) return false;
  if (index != nullptr) *index = int(rounded);
  return rounded >= 1.0 && rounded <= double(ns - 1);
}

// Bilinear shape functions on the unit square, local node order
// (0,0), (1,0), (0,1), (1,1) in (xi, eta).
struct Shape {
  double phi[4];
  double dxi[4];
  double deta[4];
};

Shape shape_at(double xi, double eta) {
  Shape sh{};
  sh.phi[0] = (1 - xi) * (1 - eta);
  sh.phi[1] = xi * (1 - eta);
  sh.phi[2] = (1 - xi) * eta;
  sh.phi[3] = xi * eta;
  sh.dxi[0] = -(1 - eta);
  sh.dxi[1] = (1 - eta);
  sh.dxi[2] = -eta;
  sh.dxi[3] = eta;
  sh.deta[0] = -(1 - xi);
  sh.deta[1] = -xi;
  sh.deta[2] = (1 - xi);
  sh.deta[3] = xi;
  return sh;
}

struct GaussTable {
  Shape sh[2][2];
};

const GaussTable& gauss_table() {
  static const GaussTable table = [] {
    GaussTable g{};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) g.sh[a][b] = shape_at(TensorGrid::kGauss[a], TensorGrid::kGauss[b]);
    return g;
  }();
  return table;
}

// Coefficients of one cell column at the two Gauss abscissae in s.
struct ColumnCoeffs {
  double L[2];
  double slope[2];
};

ColumnCoeffs column_coeffs(const TensorGrid& grid, int i) {
  ColumnCoeffs c{};
  const auto& prof = grid.profile();
  const double L0 = prof.L0();
  for (int a = 0; a < 2; ++a) {
    const double s = grid.s(i) + TensorGrid::kGauss[a] * (grid.s(i + 1) - grid.s(i));
    c.L[a] = prof.width(s);
    c.slope[a] = prof.slope(s);
    if (!(c.L[a] >= 1e-6 * L0)) {
      fail(ErrorKind::Degenerate, "width L(" + std::to_string(s) + ") = " +
                                      std::to_string(c.L[a]) + " is below 1e-6 L0");
    }
  }
  return c;
}

void check_range(const TensorGrid& grid, CellRange cells) {
  require(cells.begin >= 0 && cells.end <= grid.ns(), ErrorKind::Parameter,
          "cell range outside the grid");
}

}  // namespace

TensorGrid::TensorGrid(BilliardProfile profile, int ns, int nt)
    : profile_(std::move(profile)), ns_(ns), nt_(nt) {
  require(ns >= 8 && nt >= 8, ErrorKind::Parameter, "grid needs ns >= 8 and nt >= 8");
  const double B0 = profile_.B0();
  const double B1 = profile_.B1();
  if (!interface_on_node(B0, B1, ns, &i0_)) {
    fail(ErrorKind::Parameter, "ns = " + std::to_string(ns) +
                                   " puts no node on s = 0; nearest compatible ns is " +
                                   std::to_string(compatible_ns(profile_, ns)));
  }
  hs_ = (B0 + B1) / double(ns);
  ht_ = 1.0 / double(nt);
  s_.resize(std::size_t(ns) + 1);
  for (int i = 0; i <= ns; ++i) s_[std::size_t(i)] = double(i - i0_) * hs_;
  s_.front() = -B0;
  s_.back() = B1;
  s_[std::size_t(i0_)] = 0.0;
}

int TensorGrid::compatible_ns(const BilliardProfile& profile, int ns_min) {
  const int start = std::max(ns_min, 8);
  for (int ns = start; ns < start + 100000; ++ns) {
    if (interface_on_node(profile.B0(), profile.B1(), ns, nullptr)) return ns;
  }
  fail(ErrorKind::Parameter, "no ns places a node on s = 0; B0/(B0+B1) is not a short fraction");
}

TensorGrid::Snap TensorGrid::snap_s(double s) const {
  const double pos = (s + profile_.B0()) / hs_;
  int index = int(std::lround(pos));
  index = std::clamp(index, 0, ns_);
  Snap snap;
  snap.index = index;
  snap.value = s_[std::size_t(index)];
  snap.distance = std::abs(s - snap.value);
  return snap;
}

CellRange cells_between(const TensorGrid& grid, double s_lo, double s_hi) {
  const auto lo = grid.snap_s(s_lo);
  const auto hi = grid.snap_s(s_hi);
  return {lo.index, hi.index};
}

AssembledForms assemble_forms(const TensorGrid& grid) { return assemble_forms(grid, all_cells(grid)); }

AssembledForms assemble_forms(const TensorGrid& grid, CellRange cells) {
  check_range(grid, cells);
  const int n = grid.num_dofs();
  const int nt = grid.nt();
  const double ht = grid.ht();
  const auto& gt = gauss_table();

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> tq, ta, tm;
  const std::size_t reserve = std::size_t(std::max(0, cells.end - cells.begin)) * std::size_t(nt) * 16;
  tq.reserve(reserve);
  ta.reserve(reserve);
  tm.reserve(reserve);

  double total_mass = 0.0;
  for (int i = cells.begin; i < cells.end; ++i) {
    const double hs = grid.s(i + 1) - grid.s(i);
    const ColumnCoeffs cc = column_coeffs(grid, i);
    for (int j = 0; j < nt; ++j) {
      double kq[4][4] = {}, ka[4][4] = {}, m[4][4] = {};
      const double w = 0.25 * hs * ht;
      for (int a = 0; a < 2; ++a) {
        const double L = cc.L[a];
        const double r = cc.slope[a] / L;
        for (int b = 0; b < 2; ++b) {
          const Shape& sh = gt.sh[a][b];
          const double t = (double(j) + TensorGrid::kGauss[b]) * ht;
          double us[4], ut[4], dx[4];
          for (int p = 0; p < 4; ++p) {
            us[p] = sh.dxi[p] / hs;
            ut[p] = sh.deta[p] / ht;
            dx[p] = us[p] - t * r * ut[p];
          }
          for (int p = 0; p < 4; ++p) {
            for (int q = 0; q < 4; ++q) {
              const double tt = ut[p] * ut[q] / L;
              kq[p][q] += w * (dx[p] * dx[q] * L + tt);
              ka[p][q] += w * (us[p] * us[q] * L + tt);
              m[p][q] += w * sh.phi[p] * sh.phi[q] * L;
            }
          }
        }
      }
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) total_mass += m[p][q];

      const int ni[4] = {i, i + 1, i, i + 1};
      const int nj[4] = {j, j, j + 1, j + 1};
      for (int p = 0; p < 4; ++p) {
        if (!grid.interior(ni[p], nj[p])) continue;
        const int dp = grid.dof(ni[p], nj[p]);
        for (int q = 0; q < 4; ++q) {
          if (!grid.interior(ni[q], nj[q])) continue;
          const int dq = grid.dof(ni[q], nj[q]);
          tq.emplace_back(dp, dq, kq[p][q]);
          ta.emplace_back(dp, dq, ka[p][q]);
          tm.emplace_back(dp, dq, m[p][q]);
        }
      }
    }
  }

  AssembledForms forms;
  forms.Kq.resize(n, n);
  forms.Ka.resize(n, n);
  forms.M.resize(n, n);
  forms.Kq.setFromTriplets(tq.begin(), tq.end());
  forms.Ka.setFromTriplets(ta.begin(), ta.end());
  forms.M.setFromTriplets(tm.begin(), tm.end());
  forms.total_mass = total_mass;
  forms.cells = cells;
  return forms;
}

RegionIntegrals integrate_region(const TensorGrid& grid, const Vector& U, const Vector& V,
                                 CellRange cells) {
  check_range(grid, cells);
  require(U.size() == grid.num_dofs() && V.size() == grid.num_dofs(), ErrorKind::Parameter,
          "vector size does not match the grid");
  const int nt = grid.nt();
  const double ht = grid.ht();
  const auto& gt = gauss_table();
  RegionIntegrals out;
  for (int i = cells.begin; i < cells.end; ++i) {
    const double hs = grid.s(i + 1) - grid.s(i);
    const ColumnCoeffs cc = column_coeffs(grid, i);
    const double w = 0.25 * hs * ht;
    for (int j = 0; j < nt; ++j) {
      const double u[4] = {grid.value(U, i, j), grid.value(U, i + 1, j), grid.value(U, i, j + 1),
                           grid.value(U, i + 1, j + 1)};
      const double v[4] = {grid.value(V, i, j), grid.value(V, i + 1, j), grid.value(V, i, j + 1),
                           grid.value(V, i + 1, j + 1)};
      for (int a = 0; a < 2; ++a) {
        const double L = cc.L[a];
        const double r = cc.slope[a] / L;
        for (int b = 0; b < 2; ++b) {
          const Shape& sh = gt.sh[a][b];
          const double t = (double(j) + TensorGrid::kGauss[b]) * ht;
          double u0 = 0, us = 0, ut = 0, v0 = 0, vs = 0, vt = 0;
          for (int p = 0; p < 4; ++p) {
            u0 += sh.phi[p] * u[p];
            us += sh.dxi[p] * u[p];
            ut += sh.deta[p] * u[p];
            v0 += sh.phi[p] * v[p];
            vs += sh.dxi[p] * v[p];
            vt += sh.deta[p] * v[p];
          }
          us /= hs;
          ut /= ht;
          vs /= hs;
          vt /= ht;
          const double ux = us - t * r * ut;
          const double vx = vs - t * r * vt;
          const double dy = w * ut * vt / L;
          out.mass += w * u0 * v0 * L;
          out.dx += w * ux * vx * L;
          out.dy += dy;
          out.a += w * us * vs * L + dy;
        }
      }
    }
  }
  out.q = out.dx + out.dy;
  return out;
}

double relative_residual(const AssembledForms& forms, double E, const Vector& U) {
  const Vector MU = forms.M * U;
  const Vector r = forms.Kq * U - E * MU;
  return r.norm() / (std::abs(E) * MU.norm());
}

RegionNorm restrict_norm(const TensorGrid& grid, const Vector& U, double s_lo, double s_hi) {
  const auto lo = grid.snap_s(s_lo);
  const auto hi = grid.snap_s(s_hi);
  if (hi.index <= lo.index) {
    fail(ErrorKind::EmptyRegion, "region [" + std::to_string(s_lo) + ", " + std::to_string(s_hi) +
                                     "] covers no grid cells");
  }
  RegionNorm out;
  out.value = integrate_region(grid, U, U, {lo.index, hi.index}).mass;
  out.snap_lo = lo.value;
  out.snap_hi = hi.value;
  return out;
}

}  // namespace billiard
