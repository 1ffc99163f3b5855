// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <cstdint>
#include <vector>

#include "billiard/geometry.hpp"

namespace billiard {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Uniform tensor grid on the reference rectangle [-B0, B1] x [0, 1] in the
/// coordinates (s, t) = (x, y / L(x)). An s-node sits exactly on s = 0.
///
/// Unknowns are the interior nodes, numbered s-major:
/// dof(i, j) = (i - 1) * (nt - 1) + (j - 1) for 1 <= i < ns, 1 <= j < nt.
class TensorGrid {
 public:
  TensorGrid(BilliardProfile profile, int ns, int nt);

  /// Smallest ns >= ns_min for which the interface s = 0 is a grid line.
  static int compatible_ns(const BilliardProfile& profile, int ns_min);

  const BilliardProfile& profile() const { return profile_; }
  int ns() const { return ns_; }
  int nt() const { return nt_; }
  double hs() const { return hs_; }
  double ht() const { return ht_; }
  double s(int i) const { return s_[std::size_t(i)]; }
  double t(int j) const { return double(j) * ht_; }
  const std::vector<double>& s_nodes() const { return s_; }
  /// Index of the node at s = 0.
  int interface_index() const { return i0_; }

  int num_dofs() const { return (ns_ - 1) * (nt_ - 1); }
  int dof(int i, int j) const { return (i - 1) * (nt_ - 1) + (j - 1); }
  bool interior(int i, int j) const { return i > 0 && i < ns_ && j > 0 && j < nt_; }
  /// Nodal value of a dof vector; zero on the Dirichlet boundary.
  double value(const Vector& U, int i, int j) const {
    return interior(i, j) ? U[dof(i, j)] : 0.0;
  }

  struct Snap {
    int index = 0;          // s-node index
    double value = 0.0;     // snapped s
    double distance = 0.0;  // |requested - snapped|
  };
  Snap snap_s(double s) const;

  /// 2-point Gauss abscissae on [0, 1]; weights are 1/2 each.
  static constexpr std::array<double, 2> kGauss{0.21132486540518711775,
                                                0.78867513459481288225};

 private:
  BilliardProfile profile_;
  int ns_;
  int nt_;
  double hs_;
  double ht_;
  int i0_;
  std::vector<double> s_;
};

/// Half-open range of s-cells [begin, end); cell i spans [s_i, s_{i+1}].
struct CellRange {
  int begin = 0;
  int end = 0;
  bool empty() const { return end <= begin; }
};

/// Cells lying inside [s_lo, s_hi] after snapping both ends to s-nodes.
CellRange cells_between(const TensorGrid& grid, double s_lo, double s_hi);
inline CellRange all_cells(const TensorGrid& grid) { return {0, grid.ns()}; }

/// Stiffness and mass matrices of the transformed weak forms
///   q(u) = ∬ [(U_s - t L'/L U_t)^2 + (U_t / L)^2] L ds dt,
///   a(u) = ∬ [U_s^2 + (U_t / L)^2] L ds dt,
///   N(u) = ∬ U^2 L ds dt,
/// with bilinear elements, 2x2 Gauss quadrature and Dirichlet rows removed.
struct AssembledForms {
  SparseMatrix Kq;
  SparseMatrix Ka;
  SparseMatrix M;
  /// 1^T M 1 over all nodes, boundary included: the quadrature area.
  double total_mass = 0.0;
  CellRange cells;
};

AssembledForms assemble_forms(const TensorGrid& grid);
/// Forms restricted to the given cells; used for q_b, a_b, N_b.
AssembledForms assemble_forms(const TensorGrid& grid, CellRange cells);

/// Quadrature integrals of u·v type products over a range of cells. Values
/// agree with the corresponding restricted matrix forms.
struct RegionIntegrals {
  double mass = 0.0;  // ∬ u v
  double q = 0.0;     // q-form
  double a = 0.0;     // a-form
  double dx = 0.0;    // ∬ ∂x u ∂x v
  double dy = 0.0;    // ∬ ∂y u ∂y v
};
RegionIntegrals integrate_region(const TensorGrid& grid, const Vector& U, const Vector& V,
                                 CellRange cells);

struct EigenPair {
  double E = 0.0;
  Vector U;                 // M-normalized interior nodal values
  double residual = 0.0;    // ||Kq U - E M U|| / (E ||M U||)
  long index = -1;          // 0-based position in the full spectrum, -1 if unknown
  bool possibly_unresolved = false;  // neighbour closer than 1e-6 E
  double refine_shift = -1.0;  // relative eigenvalue shift vs the half-resolution grid, -1 if none
};

struct SolverOptions {
  double residual_tol = 1e-9;    // accepted Ritz residual; contract is 1e-8
  int block_size = 8;
  int max_restarts = 30;
  int dense_threshold = 4000;    // dense generalized solver below this many dofs
  int window_target = 40;        // eigenvalues per shifted factorization
  std::uint64_t seed = 20240611;
};

/// Number of eigenvalues strictly below E (Sylvester inertia of Kq - E M).
long count_below(const AssembledForms& forms, double E);

/// All eigenpairs with E in [lo, hi), sorted ascending, M-orthonormal,
/// sign fixed so the largest-magnitude entry is positive.
std::vector<EigenPair> solve_eigenpairs(const AssembledForms& forms, double lo, double hi,
                                        const SolverOptions& options = {});
/// The m lowest eigenpairs.
std::vector<EigenPair> solve_lowest(const AssembledForms& forms, int m,
                                    const SolverOptions& options = {});

/// Relative residual ||Kq U - E M U|| / (E ||M U||).
double relative_residual(const AssembledForms& forms, double E, const Vector& U);

/// ∬_region U^2 L ds dt over the cells between s_lo and s_hi (snapped).
struct RegionNorm {
  double value = 0.0;
  double snap_lo = 0.0;
  double snap_hi = 0.0;
};
RegionNorm restrict_norm(const TensorGrid& grid, const Vector& U, double s_lo, double s_hi);

}  // namespace billiard
