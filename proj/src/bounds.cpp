// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "billiard/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "billiard/error.hpp"
#include "billiard/numfmt.hpp"
#include "billiard/resonance.hpp"
#include "parallel.hpp"

namespace billiard {

namespace {

const Rational kThreeHalves(3, 2);

void check_gamma(const Rational& gamma) {
  require(gamma >= kThreeHalves, ErrorKind::Parameter, "gamma = " + to_string(gamma) + " is below 3/2");
}

// Plain ∫ f^2 ds of the piecewise-linear interpolant over nodes [i_lo, i_hi].
double line_l2_sq(const std::vector<double>& s, const double* f, int i_lo, int i_hi) {
  double out = 0.0;
  for (int i = i_lo; i < i_hi; ++i) {
    const double h = s[std::size_t(i) + 1] - s[std::size_t(i)];
    out += h * (f[i] * f[i] + f[i] * f[i + 1] + f[i + 1] * f[i + 1]) / 3.0;
  }
  return out;
}

// ∫_0^b of row k of an FG matrix (nodes from s = 0), same rule.
double fg_l2(const std::vector<double>& s, const Eigen::MatrixXd& m, int k) {
  const Eigen::VectorXd row = m.row(k - 1).transpose();
  return std::sqrt(line_l2_sq(s, row.data(), 0, int(s.size()) - 1));
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  const std::size_t n = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(n), v.end());
  const double hi = v[n];
  if (v.size() % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + std::ptrdiff_t(n)));
}

}  // namespace

Rational to_rational(double v) {
  require(std::isfinite(v), ErrorKind::Parameter, "cannot convert a non-finite value to a fraction");
  for (long long d = 1; d <= 64; ++d) {
    const double n = std::round(v * double(d));
    if (std::abs(n / double(d) - v) <= 1e-12 * std::max(1.0, std::abs(v))) return Rational((long long)n, d);
  }
  fail(ErrorKind::Parameter, fmt15(v) + " is not a fraction with denominator <= 64");
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

Rational alpha_large(const Rational& gamma) {
  check_gamma(gamma);
  return Rational(1) / (2 * gamma - 1);
}

Rational alpha_small(const Rational& gamma, const Rational& eps) {
  check_gamma(gamma);
  require(eps >= Rational(0), ErrorKind::Parameter, "eps must be non-negative");
  return std::max((3 + 2 * eps) / (2 * gamma + 1), (2 + 2 * eps) / (2 * gamma - 1));
}

Rational rho(const Rational& gamma, const Rational& eps) {
  check_gamma(gamma);
  require(eps >= Rational(0), ErrorKind::Parameter, "eps must be non-negative");
  const Rational r = std::max((2 + gamma + 2 * (gamma + 1) * eps) / (2 * gamma + 1),
                              (1 + 2 * gamma + 4 * gamma * eps) / (4 * gamma - 2));
  const Rational check = (1 + 2 * eps + alpha_small(gamma, eps)) / 2;
  if (r != check) {
    fail(ErrorKind::Internal, "rho = " + to_string(r) + " but (1 + 2 eps + alpha_small)/2 = " + to_string(check));
  }
  return r;
}

BChoice choose_b(double E, const Rational& gamma, const Rational& eps, double M_large, double M_small) {
  require(E > 0, ErrorKind::Parameter, "choose_b needs E > 0");
  require(M_large > 0 && M_small > 0, ErrorKind::Parameter, "M_large and M_small must be positive");
  BChoice out;
  out.b_large = M_large * std::pow(E, -to_double(alpha_large(gamma)));
  out.b_small = M_small * std::pow(E, -to_double(alpha_small(gamma, eps)));
  return out;
}

SnappedB snap_b(const TensorGrid& grid, double b, double b0) {
  if (b >= b0) {
    fail(ErrorKind::Parameter, "b = " + fmt15(b) + " is not below b0 = " + fmt15(b0) +
                                   "; raise E0 or lower M");
  }
  const auto snap = grid.snap_s(b);
  if (snap.index <= grid.interface_index()) {
    fail(ErrorKind::Resolution, "b = " + fmt15(b) + " snaps to s = 0 on a grid with hs = " + fmt15(grid.hs()) +
                                    "; refine ns");
  }
  SnappedB out;
  out.requested = b;
  out.value = snap.value;
  out.error = snap.distance;
  out.index = snap.index;
  return out;
}

double theil_sen_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorKind::Parameter, "Theil-Sen needs paired samples");
  std::vector<double> slopes;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if (x[j] != x[i]) slopes.push_back((y[j] - y[i]) / (x[j] - x[i]));
  return median(std::move(slopes));
}

LargeModeReport check_large_modes(const TensorGrid& grid, const EigenPair& pair, const ModeDecomposition& decomp,
                                  const FGData& fg, const ModeSplit& split, double b) {
  const double E = pair.E;
  const double g = grid.profile().gamma();
  const int i0 = grid.interface_index();
  const auto snap = grid.snap_s(b);
  LargeModeReport r;
  r.b = snap.value;
  if (decomp.kstar > decomp.kmax) return r;
  r.empty = false;
  r.lhs = restrict_norm(grid, split.plus, -grid.profile().B0(), 0.0).value;
  const RegionIntegrals wing = integrate_region(grid, pair.U, pair.U, {i0, snap.index});
  const double bb = r.b;
  r.term_dx = std::pow(bb, 2 * g - 1) * wing.dx;
  r.term_dy = std::pow(bb, 2 * g - 3) * wing.dy / E;
  r.term_u = wing.mass / bb;
  const double rhs = r.term_dx + r.term_dy + r.term_u;
  r.constant = rhs > 0 ? r.lhs / rhs : 0.0;

  const int kfg = std::min(decomp.kmax, fg.kmax);
  for (int k = decomp.kstar; k <= kfg; ++k) {
    ModeConstant mc;
    mc.k = k;
    mc.lhs = std::sqrt(line_l2_sq(decomp.s, decomp.mode(k), 0, snap.index));
    const double uk = std::sqrt(line_l2_sq(decomp.s, decomp.mode(k), i0, snap.index));
    mc.rhs = std::pow(bb, g - 0.5) * fg_l2(fg.s, fg.F, k) + std::pow(bb, g - 1.5) * fg_l2(fg.s, fg.G, k) / std::sqrt(E) +
             uk / std::sqrt(bb);
    mc.constant = mc.rhs > 0 ? mc.lhs / mc.rhs : 0.0;
    r.max_mode_constant = std::max(r.max_mode_constant, mc.constant);
    r.modes.push_back(mc);
  }
  return r;
}

SmallModeReport check_small_modes(const TensorGrid& grid, const EigenPair& pair, const ModeDecomposition& decomp,
                                  const FGData& fg, const ModeSplit& split, double b, double eps, double c0) {
  const auto& prof = grid.profile();
  const double E = pair.E;
  const double g = prof.gamma();
  const int i0 = grid.interface_index();
  const auto snap = grid.snap_s(b);
  SmallModeReport r;
  r.b = snap.value;
  r.nu = nu(E, prof.L0(), prof.B0()).value;
  r.applicable = in_Z_eps(E, eps, c0, prof.L0(), prof.B0());
  if (r.nu == 0.0) {
    r.resonant = true;
    r.applicable = false;
    return r;
  }
  const double bb = r.b;
  r.prefactor = E / (r.nu * r.nu);
  r.lhs = restrict_norm(grid, split.minus, -prof.B0(), 0.0).value;
  const RegionIntegrals wing = integrate_region(grid, pair.U, pair.U, {i0, grid.ns()});
  r.growth = std::pow(1.0 + E * std::pow(bb, g + 2), 2);
  r.term_dx = E * std::pow(bb, 2 * g + 1) * wing.dx;
  r.term_dy = std::pow(bb, 2 * g - 1) * wing.dy;
  r.term_u = r.growth * wing.mass / bb;
  const double rhs = r.prefactor * (r.term_dx + r.term_dy + r.term_u);
  r.constant = rhs > 0 ? r.lhs / rhs : 0.0;

  const double pre = std::sqrt(E) / r.nu;
  const double lin = 1.0 + E * std::pow(bb, g + 2);
  const int last = std::min({decomp.kstar - 1, decomp.kmax, fg.kmax});
  for (int k = 1; k <= last; ++k) {
    ModeConstant mc;
    mc.k = k;
    mc.lhs = std::sqrt(line_l2_sq(decomp.s, decomp.mode(k), 0, snap.index));
    const double uk = std::sqrt(line_l2_sq(decomp.s, decomp.mode(k), i0, snap.index));
    mc.rhs = pre * (std::sqrt(E) * std::pow(bb, g + 0.5) * fg_l2(fg.s, fg.F, k) +
                    std::pow(bb, g - 0.5) * fg_l2(fg.s, fg.G, k) + lin * uk / std::sqrt(bb));
    mc.constant = mc.rhs > 0 ? mc.lhs / mc.rhs : 0.0;
    r.max_mode_constant = std::max(r.max_mode_constant, mc.constant);
    r.modes.push_back(mc);
  }
  return r;
}

BoundReport theorem_sweep(const TensorGrid& grid, const std::vector<EigenPair>& pairs, const BoundConfig& config) {
  const auto& prof = grid.profile();
  BoundReport rep;
  rep.config = config;
  const Rational gamma = config.gamma != Rational(0) ? config.gamma : to_rational(prof.gamma());
  rep.config.gamma = gamma;
  rep.rho = rho(gamma, config.eps);
  rep.alpha_large = alpha_large(gamma);
  rep.alpha_small = alpha_small(gamma, config.eps);
  rep.b0 = config.b0 > 0 ? config.b0 : prof.B1() / 4.0;
  const double eps = to_double(config.eps);

  std::vector<const EigenPair*> sorted;
  for (const auto& p : pairs) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](const EigenPair* a, const EigenPair* b) { return a->E < b->E; });
  auto certified = [&](const EigenPair& p) { return p.refine_shift >= 0 && p.refine_shift < config.cert_tol; };

  rep.E0 = config.E0;
  if (rep.E0 <= 0) {
    rep.E0 = std::numeric_limits<double>::infinity();
    for (const auto* p : sorted)
      if (certified(*p)) {
        rep.E0 = p->E;
        break;
      }
  }
  std::vector<double> cert_E;
  for (const auto* p : sorted)
    if (certified(*p) && p->E >= rep.E0) cert_E.push_back(p->E);
  rep.c0 = config.c0 > 0 ? config.c0 : (cert_E.empty() ? 0.0 : default_c0(cert_E, prof.L0(), prof.B0(), 0.3));

  std::vector<const EigenPair*> todo;
  for (const auto* pp : sorted)
    if (pp->E >= rep.E0) todo.push_back(pp);
  rep.rows.resize(todo.size());
  detail::parallel_for(int(todo.size()), config.jobs, [&](int idx) {
    const EigenPair& p = *todo[std::size_t(idx)];
    BoundRow& row = rep.rows[std::size_t(idx)];
    row.index = p.index;
    row.E = p.E;
    const Nu n = nu(p.E, prof.L0(), prof.B0());
    row.nu = n.value;
    row.nu_k = n.k;
    row.nu_l = n.l;
    if (rep.c0 > 0) {
      row.in_Z = in_Z_eps(p.E, eps, rep.c0, prof.L0(), prof.B0());
      row.in_Z0 = in_Z_eps(p.E, 0.0, rep.c0, prof.L0(), prof.B0());
    }
    row.certified = certified(p);
    row.refine_shift = p.refine_shift;
    row.norm_W = restrict_norm(grid, p.U, 0.0, prof.B1()).value;
    row.norm_R = restrict_norm(grid, p.U, -prof.B0(), 0.0).value;
    row.norm_Omega = integrate_region(grid, p.U, p.U, all_cells(grid)).mass;
    row.ratio = std::sqrt(row.norm_Omega / row.norm_W);
    row.E_rho = std::pow(p.E, to_double(rep.rho));
    row.bhw = row.ratio / p.E;

    const BChoice bc = choose_b(p.E, gamma, config.eps, config.M_large, config.M_small);
    row.b_large = snap_b(grid, bc.b_large, rep.b0);
    row.b_small = snap_b(grid, bc.b_small, rep.b0);

    const int kmax = std::min(large_mode_threshold(p.E, prof.L0()) + config.kmax_extra, grid.nt() - 1);
    const ModeDecomposition dec = decompose(grid, p, kmax);
    const ModeSplit split = split_modes(grid, dec);
    row.minus_R = restrict_norm(grid, split.minus, -prof.B0(), 0.0).value;
    row.plus_R = restrict_norm(grid, split.plus, -prof.B0(), 0.0).value;
    const Vector tail = p.U - split.minus - split.plus;
    row.tail_R = restrict_norm(grid, tail, -prof.B0(), 0.0).value;

    const FGData fg_large = compute_FG(grid, p.U, row.b_large.value, kmax);
    row.large = check_large_modes(grid, p, dec, fg_large, split, row.b_large.value);
    const FGData fg_small = compute_FG(grid, p.U, row.b_small.value, kmax);
    row.small = rep.c0 > 0 ? check_small_modes(grid, p, dec, fg_small, split, row.b_small.value, eps, rep.c0)
                           : SmallModeReport{};
  });

  std::vector<const BoundRow*> used;
  for (const auto& r : rep.rows) {
    rep.certified += r.certified;
    rep.in_Z += r.in_Z;
    if (r.certified && r.in_Z) {
      used.push_back(&r);
      rep.max_ratio_used = std::max(rep.max_ratio_used, r.ratio);
    } else if (r.certified) {
      rep.max_ratio_excluded = std::max(rep.max_ratio_excluded, r.ratio);
    }
  }
  rep.used = int(used.size());
  rep.insufficient = rep.used < config.min_pairs;

  if (rep.used >= 2) {
    const std::size_t half = used.size() / 2;
    for (std::size_t i = 0; i < half; ++i) rep.C_fit = std::max(rep.C_fit, used[i]->ratio / used[i]->E_rho);
    for (std::size_t i = half; i < used.size(); ++i)
      rep.validation = std::max(rep.validation, used[i]->ratio / (rep.C_fit * used[i]->E_rho));
    std::vector<double> lx, ly, sx, sy, smx, smy;
    for (const auto* r : used) {
      lx.push_back(std::log(r->E));
      ly.push_back(std::log(r->ratio));
      if (r->small.applicable && r->small.constant > 0) {
        sx.push_back(std::log(r->E));
        sy.push_back(std::log(r->small.constant));
      }
      if (r->small.applicable && r->small.max_mode_constant > 0) {
        smx.push_back(std::log(r->E));
        smy.push_back(std::log(r->small.max_mode_constant));
      }
    }
    rep.ratio_slope = theil_sen_slope(lx, ly);
    rep.small_slope = theil_sen_slope(sx, sy);
    rep.small_mode_slope = theil_sen_slope(smx, smy);
  }
  std::vector<double> px, py, pmx, pmy;
  for (const auto& r : rep.rows) {
    if (!r.certified || r.large.empty) continue;
    if (r.large.constant > 0) {
      px.push_back(std::log(r.E));
      py.push_back(std::log(r.large.constant));
    }
    if (r.large.max_mode_constant > 0) {
      pmx.push_back(std::log(r.E));
      pmy.push_back(std::log(r.large.max_mode_constant));
    }
  }
  rep.large_slope = theil_sen_slope(px, py);
  rep.large_mode_slope = theil_sen_slope(pmx, pmy);
  return rep;
}

std::string bound_csv(const BoundReport& rep) {
  std::string s =
      "index,E,nu,in_Z_eps,in_Z0,certified,refine_shift,norm_W,norm_Omega,ratio,E_rho,bhw,"
      "b_large,b_large_snap_error,b_small,b_small_snap_error,"
      "plus_lhs,plus_term_dx,plus_term_dy,plus_term_u,C_plus,C_plus_mode_max,"
      "minus_lhs,minus_prefactor,minus_term_dx,minus_term_dy,minus_term_u,C_minus,C_minus_mode_max\n";
  for (const auto& r : rep.rows) {
    const auto& L = r.large;
    const auto& S = r.small;
    s += std::to_string(r.index) + "," + fmt15(r.E) + "," + fmt15(r.nu) + "," + (r.in_Z ? "1" : "0") + "," +
         (r.in_Z0 ? "1" : "0") + "," + (r.certified ? "1" : "0") + "," + fmt15(r.refine_shift) + "," +
         fmt15(std::sqrt(r.norm_W)) + "," + fmt15(std::sqrt(r.norm_Omega)) + "," + fmt15(r.ratio) + "," +
         fmt15(r.E_rho) + "," + fmt15(r.bhw) + "," + fmt15(r.b_large.value) + "," + fmt15(r.b_large.error) + "," +
         fmt15(r.b_small.value) + "," + fmt15(r.b_small.error) + "," + fmt15(L.lhs) + "," + fmt15(L.term_dx) +
         "," + fmt15(L.term_dy) + "," + fmt15(L.term_u) + "," + fmt15(L.constant) + "," +
         fmt15(L.max_mode_constant) + "," + fmt15(S.lhs) + "," + fmt15(S.prefactor) + "," + fmt15(S.term_dx) +
         "," + fmt15(S.term_dy) + "," + fmt15(S.term_u) + "," + (S.applicable ? fmt15(S.constant) : "") + "," +
         (S.applicable ? fmt15(S.max_mode_constant) : "") + "\n";
  }
  return s;
}

std::string bound_summary_json(const BoundReport& rep) {
  auto num = [](double v) { return nlohmann::json(round15(v)); };
  nlohmann::ordered_json j;
  j["config"] = {{"eps", to_string(rep.config.eps)},
                 {"gamma", to_string(rep.config.gamma)},
                 {"c0", num(rep.c0)},
                 {"c0_selected", rep.config.c0 <= 0 ? "30% quantile of nu" : "configured"},
                 {"M_large", num(rep.config.M_large)},
                 {"M_small", num(rep.config.M_small)},
                 {"b0", num(rep.b0)},
                 {"E0", num(rep.E0)},
                 {"cert_tol", num(rep.config.cert_tol)}};
  j["rho"] = to_string(rep.rho);
  j["alpha_large"] = to_string(rep.alpha_large);
  j["alpha_small"] = to_string(rep.alpha_small);
  j["pairs"] = rep.rows.size();
  j["certified"] = rep.certified;
  j["in_Z_eps"] = rep.in_Z;
  j["used"] = rep.used;
  j["insufficient_data"] = rep.insufficient;
  j["C_fit"] = num(rep.C_fit);
  j["validation"] = num(rep.validation);
  j["ratio_slope"] = num(rep.ratio_slope);
  j["C_plus_slope"] = num(rep.large_slope);
  j["C_minus_slope"] = num(rep.small_slope);
  j["C_plus_mode_slope"] = num(rep.large_mode_slope);
  j["C_minus_mode_slope"] = num(rep.small_mode_slope);
  j["max_ratio_used"] = num(rep.max_ratio_used);
  j["max_ratio_excluded"] = num(rep.max_ratio_excluded);
  return j.dump(2) + "\n";
}

}  // namespace billiard
