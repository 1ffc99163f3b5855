// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "billiard/discretize.hpp"

namespace billiard {

/// Smallest k with k^2 pi^2 / L0^2 - E >= E. Equality counts as a large mode.
int large_mode_threshold(double E, double L0);

/// Discrete sine-transform symbols of the t-direction P1 matrices on a grid
/// with nt cells: M_t sin(k pi t_j) = 2 ht mu_k sin(k pi t_j) and likewise
/// K_t with kappa_k. mu_k -> 1/2 and kappa_k -> k^2 pi^2 / 2 as nt grows.
double mass_symbol(int k, int nt);
double stiffness_symbol(int k, int nt);

/// Mode coefficients u_k(s) = 2 ∫_0^1 U(s,t) sin(k pi t) dt on the s-nodes.
///
/// The t-integral is the trapezoidal rule on the grid nodes, which is the
/// inverse discrete sine transform of the nodal values: U is reproduced
/// exactly by its nt - 1 modes. The forms of the grid split mode by mode
/// with the weights mass_symbol and stiffness_symbol in place of 1/2 and
/// k^2 pi^2 / 2.
struct ModeDecomposition {
  double E = 0.0;
  int kmax = 0;
  int kstar = 0;
  double L0 = 0.0;
  std::vector<double> s;      // s-nodes, boundary included
  // Row-major so that mode(k) is contiguous.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> coeff;  // row k - 1 holds u_k
  double total_mass = 0.0;    // N(u) over the whole billiard
  double tail_mass = 0.0;     // N-norm carried by modes k > kmax

  const double* mode(int k) const { return coeff.row(k - 1).data(); }
  Eigen::VectorXd mode_vector(int k) const { return coeff.row(k - 1).transpose(); }
};

ModeDecomposition decompose(const TensorGrid& grid, const Vector& U, double E, int kmax);
ModeDecomposition decompose(const TensorGrid& grid, const EigenPair& pair, int kmax);
/// k★(E) + 20, capped by the number of modes the grid carries.
int default_kmax(const TensorGrid& grid, double E);

/// q_b, a_b and N_b over Omega_b = {s <= b} (b snapped to an s-node). The
/// matrix values come from the element quadrature, the mode values from the
/// decomposition truncated at kmax.
struct FormValues {
  double b = 0.0;         // snapped
  double snap_distance = 0.0;
  double q = 0.0;
  double a_matrix = 0.0;
  double a_modes = 0.0;
  double n_matrix = 0.0;
  double n_modes = 0.0;

  double a_gap() const { return a_modes - a_matrix; }
  double n_gap() const { return n_modes - n_matrix; }
};

FormValues form_values(const TensorGrid& grid, const Vector& U, const ModeDecomposition& decomp,
                       double b);

/// Lambda(v) = a_b(u, v) - q_b(u, v) for v supported in Omega_b, together
/// with the two checks that accompany it.
struct GapFunctional {
  double b = 0.0;           // snapped
  double lambda = 0.0;
  double a_uv = 0.0;
  double q_uv = 0.0;
  double n_uv = 0.0;
  /// a_b(u, v) - E N_b(u, v) - Lambda(v); zero up to the eigen-residual.
  double quasi_defect = 0.0;
  /// delta_b(b) sqrt(q_b(u) q_b(v)).
  double bound = 0.0;
  bool within_bound = false;
};

GapFunctional gap_functional(const TensorGrid& grid, const EigenPair& pair, const Vector& v,
                             double b);

/// sup|L'| + sup|L'|^2 over (0, b]; zero for b <= 0. Unlike delta_b this
/// also accepts b = B1.
double slope_delta(const BilliardProfile& profile, double b);

/// Wing functionals on s in [0, b]:
///   F_k(s) = 2 L ∫_0^1 t (U_s - t L'/L U_t) cos(k pi t) dt,
///   G_k(s) = 2   ∫_0^1 t U_t sin(k pi t) dt,
/// i.e. the y-weighted Fourier coefficients of d_x u and d_y u. U_s and U_t
/// are centered nodal differences, one-sided on the boundary; the
/// t-integrals use the trapezoidal rule.
struct FGData {
  double b = 0.0;                // snapped
  int kmax = 0;
  std::vector<double> s;         // nodes from s = 0 to s = b
  Eigen::MatrixXd F;             // row k - 1 holds F_k at the nodes
  Eigen::MatrixXd G;
  double sum_F = 0.0;            // sum_k ||F_k||^2_{L2(0,b)}
  double sum_G = 0.0;
  double dx_norm = 0.0;          // ||d_x u||^2 on W_b
  double dy_norm = 0.0;          // ||d_y u||^2 on W_b
  double C_F = 0.0;              // sum_F / dx_norm
  double C_G = 0.0;
  /// 2 sup L: the constant the y <= L bound and Plancherel give for both sums.
  double ceiling = 0.0;
};

FGData compute_FG(const TensorGrid& grid, const Vector& U, double b, int kmax);

/// u_- (modes k < k★) and u_+ (k★ <= k <= kmax) as dof vectors on the grid.
struct ModeSplit {
  Vector minus;
  Vector plus;
  double minus_mass = 0.0;
  double plus_mass = 0.0;
};

ModeSplit split_modes(const TensorGrid& grid, const ModeDecomposition& decomp);

/// Discrete Plancherel sandwich: sum_k ||u_k||^2_{L2(-B0,b)} / N_b restricted
/// to k <= kmax, with the bounds [2/L0, 1/(mu_kmax L(b))].
struct PlancherelRatio {
  double ratio = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};
PlancherelRatio plancherel_ratio(const TensorGrid& grid, const ModeDecomposition& decomp, double b);

/// One-dimensional forms on s-nodal functions (zero at both ends), evaluated
/// with the grid quadrature over the cells of [-B0, b]:
///   a_{b,k}(f) = ∫ (|f'|^2 + k^2 pi^2 / L^2 |f|^2) L / 2 ds,
///   ||f||_{H1}^2 = ∫ |f'|^2 + |f|^2 ds.
double mode_form(const TensorGrid& grid, const std::vector<double>& f, int k, double b);
double h1_norm_sq(const TensorGrid& grid, const std::vector<double>& f, double b);

/// CSV tables with 15 significant digits: "s,k,value" and "s,k,F_k,G_k".
std::string modes_csv(const ModeDecomposition& decomp);
std::string fg_csv(const FGData& fg);

}  // namespace billiard
