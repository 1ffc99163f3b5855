// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

// Window eigensolver for K_q U = E M U.
//
// Window completeness comes from Sylvester inertia: the LDL^T factor of
// K_q - E M has exactly as many negative pivots as there are eigenvalues
// below E. Each window is then solved by thick-restart block Lanczos on the
// shift-inverted operator (K_q - sigma M)^{-1} M, which is self-adjoint in the
// M inner product; the eigenvalues inside [lo, hi) are exactly the ones
// closest to the midpoint shift.

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "billiard/discretize.hpp"
#include "billiard/error.hpp"

namespace billiard {

namespace {

using Dense = Eigen::MatrixXd;
using Factor = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

class ShiftedSystem {
 public:
  explicit ShiftedSystem(const AssembledForms& forms) : forms_(forms) {
    SparseMatrix pattern = forms.Kq - forms.M;
    factor_.analyzePattern(pattern);
  }

  // Factors K_q - sigma M, nudging sigma off an exact eigenvalue. Returns
  // the shift actually used.
  double factor(double sigma) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      SparseMatrix A = forms_.Kq - sigma * forms_.M;
      factor_.factorize(A);
      if (factor_.info() == Eigen::Success) {
        const auto& d = factor_.vectorD();
        const double scale = d.cwiseAbs().maxCoeff();
        if (d.cwiseAbs().minCoeff() > 1e-14 * scale) return sigma;
      }
      sigma += 1e-9 * std::max(1.0, std::abs(sigma)) * double(attempt + 1);
    }
    fail(ErrorKind::Convergence, "shifted factorization is singular near " + std::to_string(sigma));
  }

  long negatives() const { return long((factor_.vectorD().array() < 0.0).count()); }

  // Multi-right-hand-side solve. Each sweep visits every entry of L once
  // for the whole block, which is far cheaper than column-by-column solves.
  Dense solve(const Dense& rhs) const {
    using RowBlock = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto& L = factor_.matrixL().nestedExpression();
    const auto& d = factor_.vectorD();
    const Eigen::Index n = rhs.rows();
    const Eigen::Index k = rhs.cols();
    RowBlock y = factor_.permutationP() * rhs;
    const int* outer = L.outerIndexPtr();
    const int* inner = L.innerIndexPtr();
    const double* val = L.valuePtr();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double* yj = y.row(j).data();
      for (int p = outer[j]; p < outer[j + 1]; ++p) {
        const int i = inner[p];
        if (i <= j) continue;
        double* yi = y.row(i).data();
        const double l = val[p];
        for (Eigen::Index c = 0; c < k; ++c) yi[c] -= l * yj[c];
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) y.row(j) /= d[j];
    for (Eigen::Index j = n - 1; j >= 0; --j) {
      double* yj = y.row(j).data();
      for (int p = outer[j]; p < outer[j + 1]; ++p) {
        const int i = inner[p];
        if (i <= j) continue;
        const double* yi = y.row(i).data();
        const double l = val[p];
        for (Eigen::Index c = 0; c < k; ++c) yj[c] -= l * yi[c];
      }
    }
    return factor_.permutationPinv() * Dense(y);
  }

 private:
  const AssembledForms& forms_;
  Factor factor_;
};

void fix_sign(Vector& U) {
  Eigen::Index imax = 0;
  U.cwiseAbs().maxCoeff(&imax);
  if (U[imax] < 0.0) U = -U;
}

void flag_clusters(std::vector<EigenPair>& pairs) {
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    const double gap = pairs[i + 1].E - pairs[i].E;
    if (gap < 1e-6 * pairs[i + 1].E) {
      pairs[i].possibly_unresolved = true;
      pairs[i + 1].possibly_unresolved = true;
    }
  }
}

std::vector<EigenPair> dense_all(const AssembledForms& forms) {
  const Dense K = Dense(forms.Kq);
  const Dense M = Dense(forms.M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Dense> es(K, M);
  require(es.info() == Eigen::Success, ErrorKind::Convergence, "dense generalized eigensolver failed");
  std::vector<EigenPair> out;
  out.reserve(std::size_t(K.rows()));
  for (Eigen::Index k = 0; k < K.rows(); ++k) {
    EigenPair p;
    p.E = es.eigenvalues()[k];
    p.U = es.eigenvectors().col(k);
    p.U /= std::sqrt(p.U.dot(forms.M * p.U));
    fix_sign(p.U);
    p.residual = relative_residual(forms, p.E, p.U);
    p.index = long(k);
    out.push_back(std::move(p));
  }
  return out;
}

// M-orthonormalizes the columns of X against basis columns [0, cols) and
// among themselves (classical Gram-Schmidt, two passes). Columns that
// collapse are replaced by random directions.
void orthonormalize(Dense& X, Dense& MX, const Dense& V, const Dense& MV, Eigen::Index cols,
                    const SparseMatrix& M, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  auto project = [&](auto&& Y) {
    if (cols == 0) return;
    for (int pass = 0; pass < 2; ++pass) Y -= V.leftCols(cols) * (MV.leftCols(cols).transpose() * Y);
  };
  const Eigen::VectorXd before = (X.transpose() * (M * X)).diagonal().cwiseMax(0.0).cwiseSqrt();
  project(X);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    for (int attempt = 0;; ++attempt) {
      Vector x = X.col(j);
      for (int pass = 0; pass < 2 && j > 0; ++pass) x -= X.leftCols(j) * (MX.leftCols(j).transpose() * x);
      Vector mx = M * x;
      const double after = std::sqrt(std::max(0.0, x.dot(mx)));
      if (after > 1e-10 * before[j] && after > 0.0) {
        X.col(j) = x / after;
        MX.col(j) = mx / after;
        break;
      }
      require(attempt < 8, ErrorKind::Internal, "cannot extend the Krylov basis");
      Vector r(X.rows());
      for (Eigen::Index k = 0; k < r.size(); ++k) r[k] = normal(rng);
      project(r);
      X.col(j) = r;
    }
  }
}

struct WindowResult {
  std::vector<EigenPair> pairs;
  double worst_residual = 0.0;
  bool converged = false;
};

WindowResult krylov_window(ShiftedSystem& sys, const AssembledForms& forms, double lo, double hi,
                           long count, const SolverOptions& opt, std::mt19937_64& rng) {
  const Eigen::Index n = forms.M.rows();
  const Eigen::Index c = count;
  const Eigen::Index p = std::max(1, opt.block_size);
  Eigen::Index m = ((3 * c + 2 * p + p - 1) / p) * p;
  m = std::min(m, (n / p) * p);
  require(m >= c + p, ErrorKind::Parameter, "window holds too many eigenvalues for the grid");
  const Eigen::Index keep = std::min(c + p, m - p);

  const double sigma = sys.factor(0.5 * (lo + hi));

  Dense V(n, m), MV(n, m), W(n, m), T = Dense::Zero(m, m);
  Dense P(n, p);
  std::normal_distribution<double> normal;
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index r = 0; r < n; ++r) P(r, j) = normal(rng);

  Eigen::Index cols = 0;
  WindowResult result;
  result.worst_residual = INFINITY;
  for (int cycle = 0; cycle <= opt.max_restarts; ++cycle) {
    while (cols + p <= m) {
      Dense MX(n, p);
      orthonormalize(P, MX, V, MV, cols, forms.M, rng);
      V.middleCols(cols, p) = P;
      MV.middleCols(cols, p) = MX;
      const Dense WX = sys.solve(MX);
      W.middleCols(cols, p) = WX;
      const Dense Tnew = MV.leftCols(cols + p).transpose() * WX;
      T.block(0, cols, cols + p, p) = Tnew;
      T.block(cols, 0, p, cols + p) = Tnew.transpose();
      cols += p;
      P = WX;
    }

    const Dense Ts = 0.5 * (T.topLeftCorner(cols, cols) + T.topLeftCorner(cols, cols).transpose());
    Eigen::SelfAdjointEigenSolver<Dense> es(Ts);
    require(es.info() == Eigen::Success, ErrorKind::Internal, "Rayleigh-Ritz step failed");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(cols));
    for (Eigen::Index k = 0; k < cols; ++k) order[std::size_t(k)] = k;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
      return std::abs(es.eigenvalues()[x]) > std::abs(es.eigenvalues()[y]);
    });
    Dense Y(cols, keep);
    for (Eigen::Index k = 0; k < keep; ++k) Y.col(k) = es.eigenvectors().col(order[std::size_t(k)]);

    const Dense X = V.leftCols(cols) * Y.leftCols(c);
    std::vector<EigenPair> pairs;
    double worst = 0.0;
    bool inside = true;
    for (Eigen::Index k = 0; k < c; ++k) {
      EigenPair pr;
      const double theta = es.eigenvalues()[order[std::size_t(k)]];
      pr.E = sigma + 1.0 / theta;
      pr.U = X.col(k);
      pr.U /= std::sqrt(pr.U.dot(forms.M * pr.U));
      pr.residual = relative_residual(forms, pr.E, pr.U);
      worst = std::max(worst, pr.residual);
      const double slack = 1e-9 * std::max(1.0, std::abs(hi));
      if (pr.E < lo - slack || pr.E >= hi + slack) inside = false;
      pairs.push_back(std::move(pr));
    }
    if (worst < result.worst_residual) {
      result.worst_residual = worst;
      result.pairs = pairs;
    }
    if (worst <= opt.residual_tol && inside) {
      result.converged = true;
      result.pairs = std::move(pairs);
      break;
    }
    if (cycle == opt.max_restarts) break;

    // Thick restart: the pending block is projected against the full basis
    // before the basis is truncated to the leading Ritz vectors.
    for (int pass = 0; pass < 2; ++pass) P -= V.leftCols(cols) * (MV.leftCols(cols).transpose() * P);
    V.leftCols(keep) = (V.leftCols(cols) * Y).eval();
    MV.leftCols(keep) = (MV.leftCols(cols) * Y).eval();
    W.leftCols(keep) = (W.leftCols(cols) * Y).eval();
    const Dense Tk = Y.transpose() * Ts * Y;
    T.setZero();
    T.topLeftCorner(keep, keep) = Tk;
    cols = keep;
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const EigenPair& x, const EigenPair& y) { return x.E < y.E; });
  return result;
}

struct Window {
  double lo;
  double hi;
  long below_lo;
  long below_hi;
};

}  // namespace

long count_below(const AssembledForms& forms, double E) {
  ShiftedSystem sys(forms);
  sys.factor(E);
  return sys.negatives();
}

std::vector<EigenPair> solve_eigenpairs(const AssembledForms& forms, double lo, double hi,
                                        const SolverOptions& options) {
  require(lo >= 0.0 && hi > lo, ErrorKind::Parameter, "window needs 0 <= E_lo < E_hi");
  const Eigen::Index n = forms.M.rows();
  if (n < options.dense_threshold) {
    std::vector<EigenPair> out;
    for (auto& p : dense_all(forms))
      if (p.E >= lo && p.E < hi) out.push_back(std::move(p));
    flag_clusters(out);
    return out;
  }

  ShiftedSystem sys(forms);
  auto count = [&](double E) {
    sys.factor(E);
    return sys.negatives();
  };

  std::vector<Window> pending{{lo, hi, count(lo), count(hi)}};
  std::vector<Window> windows;
  while (!pending.empty()) {
    Window w = pending.back();
    pending.pop_back();
    const long c = w.below_hi - w.below_lo;
    if (c <= 0) continue;
    if (c > options.window_target && (w.hi - w.lo) > 1e-9 * w.hi) {
      const double mid = 0.5 * (w.lo + w.hi);
      const long below_mid = count(mid);
      pending.push_back({mid, w.hi, below_mid, w.below_hi});
      pending.push_back({w.lo, mid, w.below_lo, below_mid});
      continue;
    }
    windows.push_back(w);
  }
  std::sort(windows.begin(), windows.end(), [](const Window& a, const Window& b) { return a.lo < b.lo; });

  std::mt19937_64 rng(options.seed);
  std::vector<EigenPair> out;
  for (const auto& w : windows) {
    const long c = w.below_hi - w.below_lo;
    WindowResult r = krylov_window(sys, forms, w.lo, w.hi, c, options, rng);
    if (!r.converged && r.worst_residual > 1e-8) {
      throw ConvergenceError("window [" + std::to_string(w.lo) + ", " + std::to_string(w.hi) +
                                 ") did not converge after " +
                                 std::to_string(options.max_restarts) + " restarts",
                             r.worst_residual);
    }
    for (std::size_t k = 0; k < r.pairs.size(); ++k) {
      EigenPair& p = r.pairs[k];
      p.index = w.below_lo + long(k);
      fix_sign(p.U);
      out.push_back(std::move(p));
    }
  }
  flag_clusters(out);
  return out;
}

std::vector<EigenPair> solve_lowest(const AssembledForms& forms, int m, const SolverOptions& options) {
  require(m >= 1, ErrorKind::Parameter, "need m >= 1");
  const Eigen::Index n = forms.M.rows();
  require(m <= n, ErrorKind::Parameter, "m exceeds the number of unknowns");
  if (n < options.dense_threshold) {
    auto all = dense_all(forms);
    all.resize(std::size_t(m));
    flag_clusters(all);
    return all;
  }
  // Weyl's law N(E) ~ area E / (4 pi) seeds the upper bound.
  double hi = 4.0 * M_PI * (double(m) + 8.0) / forms.total_mass;
  while (count_below(forms, hi) < m) hi *= 1.5;
  auto pairs = solve_eigenpairs(forms, 0.0, hi, options);
  pairs.resize(std::size_t(m));
  flag_clusters(pairs);
  return pairs;
}

}  // namespace billiard
