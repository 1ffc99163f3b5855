// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "billiard/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "billiard/adiabatic.hpp"
#include "billiard/bounds.hpp"
#include "billiard/cache.hpp"
#include "billiard/error.hpp"
#include "billiard/numfmt.hpp"
#include "billiard/onedim.hpp"
#include "billiard/resonance.hpp"
#include "parallel.hpp"

namespace billiard {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorKind::Format, key + ": expected true or false, got '" + v + "'");
}

int parse_int(const std::string& v, const std::string& key) {
  const long n = parse_long(v, key);
  require(n >= std::numeric_limits<int>::min() && n <= std::numeric_limits<int>::max(), ErrorKind::Format,
          key + ": value out of range");
  return int(n);
}

std::vector<double> parse_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), key));
  require(!out.empty(), ErrorKind::Format, key + ": empty list");
  return out;
}

// Accumulates assertion-level checks and informational lines for one suite.
class Suite {
 public:
  explicit Suite(std::string name) : name_(std::move(name)) {}

  void check(const std::string& name, bool passed, const std::string& detail) {
    checks_.push_back({name, passed, detail});
  }
  void info(const std::string& key, const std::string& value) { info_.emplace_back(key, value); }

  int failed() const {
    return int(std::count_if(checks_.begin(), checks_.end(), [](const Check& c) { return !c.passed; }));
  }

  std::string text() const {
    std::string s = "suite " + name_ + "\n";
    for (const auto& c : checks_) s += (c.passed ? "  PASS " : "  FAIL ") + c.name + ": " + c.detail + "\n";
    for (const auto& [k, v] : info_) s += "  info " + k + ": " + v + "\n";
    s += "  " + std::to_string(int(checks_.size()) - failed()) + " passed, " + std::to_string(failed()) +
         " failed\n";
    return s;
  }

  nlohmann::ordered_json json() const {
    nlohmann::ordered_json j;
    j["suite"] = name_;
    j["passed"] = int(checks_.size()) - failed();
    j["failed"] = failed();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks_) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    nlohmann::ordered_json info = nlohmann::ordered_json::object();
    for (const auto& [k, v] : info_) info[k] = v;
    j["info"] = info;
    return j;
  }

 private:
  struct Check {
    std::string name;
    bool passed;
    std::string detail;
  };
  std::string name_;
  std::vector<Check> checks_;
  std::vector<std::pair<std::string, std::string>> info_;
};

std::string write_output(const RunConfig& config, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(config.out_dir);
  const std::string path = (std::filesystem::path(config.out_dir) / name).string();
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::Io, "cannot write " + path);
  os << content;
  if (!os) fail(ErrorKind::Io, "write to " + path + " failed");
  return path;
}

void require_grid(const RunConfig& c) {
  require(c.ns > 0 && c.nt > 0, ErrorKind::Parameter, "config needs grid.ns and grid.nt");
}

void require_window(const RunConfig& c) {
  require(c.window_hi > c.window_lo && c.window_lo >= 0, ErrorKind::Parameter,
          "config needs 0 <= window.lo < window.hi");
}

// Opens the configured cache, or starts an empty one. A cache built for a
// different profile or grid is refused rather than overwritten.
EigenCache open_cache(const RunConfig& config, const BilliardProfile& profile, bool must_exist) {
  const std::string path = config.resolved_cache_path();
  if (!std::filesystem::exists(path)) {
    if (must_exist) fail(ErrorKind::Io, "cache file " + path + " not found; run 'billiard spectrum' first");
    EigenCache c;
    c.profile = profile.to_record();
    c.ns = config.ns;
    c.nt = config.nt;
    c.residual_tol = config.solver.residual_tol;
    return c;
  }
  EigenCache c = read_cache(path);
  if (c.profile != profile.to_record() || c.ns != config.ns || c.nt != config.nt) {
    fail(ErrorKind::Format, path + " was built for a different profile or grid (ns=" + std::to_string(c.ns) +
                                ", nt=" + std::to_string(c.nt) + "); point cache.path elsewhere or delete it");
  }
  if (c.residual_tol > config.solver.residual_tol) {
    fail(ErrorKind::Format, path + " was solved to residual " + fmt15(c.residual_tol) + ", looser than the requested " +
                                fmt15(config.solver.residual_tol) + "; point cache.path elsewhere or delete it");
  }
  return c;
}

// Fills the missing parts of the window. Returns the number of solved windows.
int extend_cache(const RunConfig& config, const BilliardProfile& profile, EigenCache& cache, std::string& log) {
  const auto missing = cache.missing(config.window_lo, config.window_hi);
  if (missing.empty()) return 0;
  const TensorGrid grid(profile, config.ns, config.nt);
  const AssembledForms forms = assemble_forms(grid);
  std::unique_ptr<TensorGrid> coarse_grid;
  std::unique_ptr<AssembledForms> coarse_forms;
  if (config.certify) {
    require(config.ns % 2 == 0 && config.nt % 2 == 0, ErrorKind::Parameter,
            "certification solves the (ns/2, nt/2) grid and needs even ns and nt");
    coarse_grid = std::make_unique<TensorGrid>(profile, config.ns / 2, config.nt / 2);
    coarse_forms = std::make_unique<AssembledForms>(assemble_forms(*coarse_grid));
  }
  for (const auto& [lo, hi] : missing) {
    auto fine = solve_eigenpairs(forms, lo, hi, config.solver);
    if (coarse_forms) {
      // Nested grids: coarse eigenvalues lie above the fine ones with the same index.
      const auto coarse = solve_eigenpairs(*coarse_forms, lo, hi * (1.0 + 2.0 * config.cert_tol), config.solver);
      std::map<long, double> by_index;
      for (const auto& p : coarse) by_index[p.index] = p.E;
      for (auto& p : fine) {
        const auto it = by_index.find(p.index);
        if (it != by_index.end()) p.refine_shift = (it->second - p.E) / p.E;
      }
    }
    log += "solved [" + fmt15(lo) + ", " + fmt15(hi) + "): " + std::to_string(fine.size()) + " pairs\n";
    cache.merge(lo, hi, std::move(fine));
  }
  return int(missing.size());
}

bool is_certified(const EigenPair& p, double tol) { return p.refine_shift >= 0 && p.refine_shift < tol; }

double resolve_c0(const RunConfig& config, const BilliardProfile& profile, const std::vector<const EigenPair*>& pairs) {
  if (config.c0 > 0) return config.c0;
  std::vector<double> cert, all;
  for (const auto* p : pairs) {
    all.push_back(p->E);
    if (is_certified(*p, config.cert_tol)) cert.push_back(p->E);
  }
  const auto& src = cert.empty() ? all : cert;
  return src.empty() ? 0.0 : default_c0(src, profile.L0(), profile.B0(), 0.3);
}

std::vector<const EigenPair*> window_pairs(const RunConfig& config, const EigenCache& cache) {
  const auto missing = cache.missing(config.window_lo, config.window_hi);
  if (!missing.empty()) {
    fail(ErrorKind::Precondition, "cache lacks [" + fmt15(missing.front().first) + ", " +
                                      fmt15(missing.front().second) + "); run 'billiard spectrum' for this window");
  }
  return cache.in_window(config.window_lo, config.window_hi);
}

std::string spectrum_csv(const RunConfig& config, const BilliardProfile& profile,
                         const std::vector<const EigenPair*>& pairs, double c0) {
  std::string s = "index,E,residual,refine_shift,certified,nu,argmin_k,argmin_l";
  for (double e : config.eps) s += ",z_eps_" + fmt15(e);
  s += "\n";
  for (const auto* p : pairs) {
    const Nu n = nu(p->E, profile.L0(), profile.B0());
    s += std::to_string(p->index) + "," + fmt15(p->E) + "," + fmt15(p->residual) + "," + fmt15(p->refine_shift) +
         "," + (is_certified(*p, config.cert_tol) ? "1" : "0") + "," + fmt15(n.value) + "," + std::to_string(n.k) +
         "," + std::to_string(n.l);
    for (double e : config.eps) s += c0 > 0 ? (n.value >= c0 * std::pow(p->E, -e) ? ",1" : ",0") : ",";
    s += "\n";
  }
  return s;
}

template <class Fn>
void detail_parallel(const RunConfig& config, int n, Fn&& fn) {
  detail::parallel_for(n, config.resolved_jobs(), std::forward<Fn>(fn));
}

// ---------------------------------------------------------------- onedim

void onedim_suite(const RunConfig& config, Suite& suite, CommandResult& result) {
  {
    const Mesh1D mesh(1.0, 1.0, 512, 512);
    const double v = hminus1_norm(mesh, [](double) { return 1.0; });
    const double exact = std::sqrt(2.0 / 3.0);
    suite.check("hminus1_constant_load", std::abs(v - exact) <= 1e-4 * exact,
                "||1||_{H^-1(-1,1)} = " + fmt15(v) + ", exact " + fmt15(exact));
  }
  {
    std::mt19937_64 rng(config.onedim_seed);
    std::normal_distribution<double> nd;
    int held = 0, total = 0;
    for (double b : {0.05, 0.1, 0.2}) {
      const Mesh1D mesh = Mesh1D::with_density(1.0, b, 64, 128);
      for (int r = 0; r < 10; ++r) {
        const double a1 = nd(rng), a2 = nd(rng);
        const Field1D H = sample_split(mesh, [](double) { return 0.0; },
                                       [&](double x) { return a1 * std::sin(kPi * x / b) + a2 * x / b; });
        held += hminus1_from_antiderivative(mesh, H).holds;
        ++total;
      }
    }
    suite.check("antiderivative_bound", held == total, std::to_string(held) + "/" + std::to_string(total) + " hold");
  }
  {
    const Mesh1D mesh(1.0, 0.2, 64, 64);
    const Field1D H = sample_split(mesh, [](double) { return 0.0; }, [](double) { return 1.0; });
    const DuhamelParticular d = vp_duhamel(mesh, H, 10.0);
    const double v01 = d.v.right[32];
    const double exact = std::sin(1.0) / 10.0;
    suite.check("duhamel_constant_load", std::abs(v01 - exact) <= 1e-10,
                "v(0.1) = " + fmt15(v01) + ", exact sin(1)/10 = " + fmt15(exact));
    suite.check("duhamel_envelope", d.envelope_ok, "max |v|/(||H|| sqrt x) = " + fmt15(d.envelope_ratio));
  }
  {
    int bad = 0, total = 0;
    double worst = 0.0;
    for (double b : {0.05, 0.1, 0.2})
      for (double z : {-25.0, -1.0, 2.0, 0.5 / (b * b), 4.0 / (b * b)}) {
        const GreenFunction g(z, 1.0, b);
        const double scale = std::max({std::abs(g(-0.5)), std::abs(g(0.0)), 1e-300});
        const double d = 1e-7;
        const double ends = std::max(std::abs(g(-1.0)), std::abs(g(b))) / scale;
        const double cont = std::abs(g(d) - g(-d)) / scale;
        const double jump_exact = g.derivative(0.0, true) - g.derivative(0.0, false);
        const double jump_rel = std::abs(jump_exact - g.jump()) / std::max(std::abs(g.jump()), 1e-300);
        const double h = 1e-4 * b;
        const double fd = (g(h) - g(0.0)) / h - (g(0.0) - g(-h)) / h;
        const double slope = std::max({std::abs(g.jump()), std::abs(g.derivative(0.0, true)),
                                       std::abs(g.derivative(0.0, false)), 1e-300});
        const double fd_rel = std::abs(fd - g.jump()) / slope;
        const double e = std::max({ends / 1e-12, cont / 1e-5, jump_rel / 1e-10, fd_rel / 1e-2});
        worst = std::max(worst, e);
        bad += e > 1.0;
        ++total;
      }
    suite.check("green_continuity_and_jump", bad == 0,
                std::to_string(bad) + " violations in " + std::to_string(total) +
                    " (z, b) cases; worst scaled error " + fmt15(worst));
  }
  {
    ControlSweepOptions opts;
    opts.beta = config.beta;
    opts.samples = config.onedim_samples;
    opts.seed = config.onedim_seed;
    try {
      const ControlSweep sweep = control_sweep(opts);
      bool finite = true;
      for (const auto& r : sweep.rows) finite = finite && std::isfinite(r.constant) && r.constant > 0;
      suite.check("control_estimate_finite", finite,
                  std::to_string(sweep.rows.size()) + " (z, b) cells x " + std::to_string(opts.samples) +
                      " manufactured solutions, residuals below 1e-6");
      for (const auto& rs : sweep.regimes) {
        std::string cs;
        for (std::size_t i = 0; i < rs.b.size(); ++i) cs += (i ? " " : "") + fmt15(rs.constant[i]);
        suite.info("control_slope_" + to_string(rs.regime), fmt15(rs.slope) + " (constants " + cs + ")");
      }
      result.files.push_back(write_output(config, "onedim_control.csv", control_sweep_csv(sweep)));
    } catch (const Error& e) {
      suite.check("control_estimate_finite", false, e.what());
    }
  }
  {
    int bad = 0, total = 0;
    double min_margin = 1.0;
    for (double B0 : {1.0, 2.0})
      for (double b : {0.01, 0.05, 0.1, 0.2})
        for (double omega : {0.0, 1.0, 10.0, 100.0, 1000.0}) {
          const auto r = convexity_check(omega, B0, b, 0.25);
          bad += !r.holds;
          ++total;
          min_margin = std::min(min_margin, r.margin);
        }
    const auto prof = make_truncated_quarter_stadium(1.0, 0.95, 2.0);
    const double b0 = prof.B1() / 4.0;
    for (double E : {200.0, 800.0, 1500.0}) {
      const int ks = large_mode_threshold(E, prof.L0());
      for (int k = ks; k <= ks + 4; ++k)
        for (double b : {0.05, 0.2, b0}) {
          const auto r = convexity_check(prof, k, E, b, b0);
          bad += !r.holds;
          ++total;
          min_margin = std::min(min_margin, r.margin);
        }
    }
    suite.check("convexity", bad == 0,
                std::to_string(bad) + " violations in " + std::to_string(total) + " cases; min margin " +
                    fmt15(min_margin));
  }
  {
    const double x0 = 1e-3;
    const double small = sinh_ratio_F(x0) / x0;
    const double large = sinh_ratio_F(40.0);
    suite.check("F_small_X", std::abs(small - 1.0 / 3.0) <= 0.01 / 3.0, "F(X)/X at X = 1e-3: " + fmt15(small));
    suite.check("F_large_X", std::abs(large - 0.5) <= 0.005, "F(40) = " + fmt15(large) + " (limit 1/2)");
  }
  {
    double worst = 0.0;
    for (double x : {0.55, 0.6, 0.7, 0.75, 0.8, 0.9, 0.95}) {
      const double h = 1e-5;
      const double d1 = (cutoff(x + h) - cutoff(x - h)) / (2 * h);
      const double d2 = (cutoff(x + h) - 2 * cutoff(x) + cutoff(x - h)) / (h * h);
      worst = std::max({worst, std::abs(d1 - cutoff_d1(x)), std::abs(d2 - cutoff_d2(x)) * 1e-3});
    }
    const bool ends = cutoff(0.5) == 1.0 && cutoff(1.0) == 0.0 && cutoff_d1(0.5) == 0.0 && cutoff_d1(1.0) == 0.0;
    suite.check("cutoff_derivatives", ends && worst < 1e-5, "worst derivative mismatch " + fmt15(worst));
    const Mesh1D mesh = Mesh1D::with_density(1.0, 0.1, 64, 256);
    const Field1D u = sample(mesh, [](double x) { return x > 0 ? std::sin(30.0 * x) : 0.0; });
    const auto c = cutoff_commutator(mesh, u);
    suite.info("commutator_ratios", fmt15(c.first_ratio) + " " + fmt15(c.second_ratio));
  }
}

// ----------------------------------------------------------------- forms

void forms_suite(const RunConfig& config, Suite& suite, CommandResult& result) {
  require_grid(config);
  require_window(config);
  const BilliardProfile profile = config.build_profile();
  const EigenCache cache = open_cache(config, profile, true);
  const auto pairs = window_pairs(config, cache);
  require(!pairs.empty(), ErrorKind::EmptyRegion, "no cached eigenpairs in the window");
  const TensorGrid grid(profile, config.ns, config.nt);
  const std::vector<double> bs{profile.B1() / 4.0, profile.B1() / 2.0};

  struct Row {
    double a_gap[2]{};
    double n_defect = 0.0;
    double tail = 0.0;
    int kmax = 0;
    PlancherelRatio pl;
  };
  std::vector<Row> rows(pairs.size());
  detail_parallel(config, int(pairs.size()), [&](int i) {
    const EigenPair& p = *pairs[std::size_t(i)];
    Row& r = rows[std::size_t(i)];
    r.kmax = std::min(large_mode_threshold(p.E, profile.L0()) + config.kmax_extra, grid.nt() - 1);
    const ModeDecomposition dec = decompose(grid, p, r.kmax);
    for (int j = 0; j < 2; ++j) {
      const FormValues fv = form_values(grid, p.U, dec, bs[std::size_t(j)]);
      r.a_gap[j] = std::abs(fv.a_gap()) / fv.a_matrix;
    }
    r.n_defect = std::abs(integrate_region(grid, p.U, p.U, all_cells(grid)).mass - 1.0);
    r.tail = dec.tail_mass;
    r.pl = plancherel_ratio(grid, dec, bs[0]);
  });

  double worst_gap = 0.0, worst_n = 0.0, worst_tail = 0.0;
  int gap_bad = 0, n_bad = 0, pl_bad = 0;
  std::string csv = "index,E,kmax,tail_mass,a_gap_rel_b1,a_gap_rel_b2,n_defect,plancherel_ratio,plancherel_lower,"
                    "plancherel_upper\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Row& r = rows[i];
    for (double g : r.a_gap) {
      worst_gap = std::max(worst_gap, g);
      gap_bad += g > 1e-6;
    }
    worst_n = std::max(worst_n, r.n_defect);
    n_bad += r.n_defect > 1e-8;
    worst_tail = std::max(worst_tail, r.tail);
    pl_bad += !(r.pl.ratio >= r.pl.lower * (1 - 1e-12) && r.pl.ratio <= r.pl.upper * (1 + 1e-12));
    csv += std::to_string(pairs[i]->index) + "," + fmt15(pairs[i]->E) + "," + std::to_string(r.kmax) + "," +
           fmt15(r.tail) + "," + fmt15(r.a_gap[0]) + "," + fmt15(r.a_gap[1]) + "," + fmt15(r.n_defect) + "," +
           fmt15(r.pl.ratio) + "," + fmt15(r.pl.lower) + "," + fmt15(r.pl.upper) + "\n";
  }
  const std::string n = std::to_string(pairs.size());
  suite.check("mode_sum_a_b", gap_bad == 0,
              std::to_string(gap_bad) + " of " + std::to_string(2 * pairs.size()) +
                  " (pair, b) cases above 1e-6; worst " + fmt15(worst_gap));
  suite.check("normalization", n_bad == 0, std::to_string(n_bad) + " of " + n + " above 1e-8; worst " + fmt15(worst_n));
  suite.check("plancherel_sandwich", pl_bad == 0, std::to_string(pl_bad) + " of " + n + " outside the bounds");
  suite.info("kmax", "k* + " + std::to_string(config.kmax_extra) + "; worst truncated tail mass " + fmt15(worst_tail));

  std::mt19937_64 rng(config.forms_seed);
  std::normal_distribution<double> nd;
  int violations = 0;
  double worst_ratio = 0.0, worst_defect = 0.0;
  for (int r = 0; r < config.forms_random_v; ++r) {
    const EigenPair& p = *pairs[std::size_t(r) % pairs.size()];
    const double b = bs[std::size_t(r) % bs.size()];
    const int end = grid.snap_s(b).index;
    Vector v = Vector::Zero(grid.num_dofs());
    for (int i = 1; i < end; ++i)
      for (int j = 1; j < grid.nt(); ++j) v[grid.dof(i, j)] = nd(rng);
    const GapFunctional g = gap_functional(grid, p, v, b);
    violations += !g.within_bound;
    if (g.bound > 0) worst_ratio = std::max(worst_ratio, std::abs(g.lambda) / g.bound);
    worst_defect = std::max(worst_defect, std::abs(g.quasi_defect) / std::sqrt(std::abs(g.a_uv) + 1e-300));
  }
  suite.check("norm_equivalence", violations == 0,
              std::to_string(violations) + " violations in " + std::to_string(config.forms_random_v) +
                  " random fields; worst |a - q| / bound " + fmt15(worst_ratio));
  suite.info("quasimode_defect", fmt15(worst_defect));
  result.files.push_back(write_output(config, "forms.csv", csv));
}

// ---------------------------------------------------------------- bounds

BoundConfig bound_config(const RunConfig& config) {
  BoundConfig bc;
  bc.eps = to_rational(config.eps.front());
  bc.c0 = config.c0;
  bc.M_large = config.M_large;
  bc.M_small = config.M_small;
  bc.b0 = config.b0;
  bc.E0 = config.E0;
  bc.cert_tol = config.cert_tol;
  bc.kmax_extra = config.kmax_extra;
  bc.min_pairs = config.min_pairs;
  bc.jobs = config.resolved_jobs();
  return bc;
}

void exponent_checks(Suite& suite) {
  bool identity = true;
  try {
    for (const Rational g : {Rational(3, 2), Rational(2), Rational(3)})
      for (const Rational e : {Rational(0), Rational(1, 16), Rational(1, 8)}) (void)rho(g, e);
  } catch (const Error&) {
    identity = false;
  }
  suite.check("exponent_identity", identity, "rho = (1 + 2 eps + alpha_small)/2 on gamma {3/2,2,3} x eps {0,1/16,1/8}");
  bool corollary = true;
  for (const Rational e : {Rational(0), Rational(1, 16), Rational(1, 8)})
    corollary = corollary && rho(Rational(2), e) == (Rational(5) + Rational(8) * e) / Rational(6);
  suite.check("exponent_gamma_2", corollary, "rho(2, eps) = (5 + 8 eps)/6; rho(2,0) = " +
                                                 to_string(rho(Rational(2), Rational(0))) + ", rho(2,1/8) = " +
                                                 to_string(rho(Rational(2), Rational(1, 8))));
  bool mono = true;
  const std::vector<Rational> gs{Rational(3, 2), Rational(2), Rational(3)};
  const std::vector<Rational> es{Rational(0), Rational(1, 16), Rational(1, 8)};
  for (std::size_t i = 0; i < gs.size(); ++i)
    for (std::size_t j = 0; j < es.size(); ++j) {
      if (j + 1 < es.size()) mono = mono && rho(gs[i], es[j]) <= rho(gs[i], es[j + 1]);
      if (i + 1 < gs.size()) mono = mono && rho(gs[i], es[j]) >= rho(gs[i + 1], es[j]);
    }
  suite.check("exponent_monotone", mono, "non-decreasing in eps, non-increasing in gamma");
}

BoundReport bounds_suite(const RunConfig& config, Suite& suite, CommandResult& result) {
  require_grid(config);
  require_window(config);
  const BilliardProfile profile = config.build_profile();
  const EigenCache cache = open_cache(config, profile, true);
  const auto ptrs = window_pairs(config, cache);
  std::vector<EigenPair> pairs;
  for (const auto* p : ptrs) pairs.push_back(*p);
  const TensorGrid grid(profile, config.ns, config.nt);

  exponent_checks(suite);
  const BoundReport rep = theorem_sweep(grid, pairs, bound_config(config));

  int book_bad = 0, ratio_bad = 0;
  for (const auto& r : rep.rows) {
    book_bad += r.minus_R + r.plus_R > (r.norm_R + r.tail_R) * (1 + 1e-10);
    ratio_bad += r.ratio < 1.0;
  }
  const std::string n = std::to_string(rep.rows.size());
  suite.check("norm_bookkeeping", book_bad == 0, std::to_string(book_bad) + " of " + n + " rows violate");
  suite.check("ratio_at_least_one", ratio_bad == 0, std::to_string(ratio_bad) + " of " + n + " rows below 1");
  suite.info("pairs", n + " with E >= E0 = " + fmt15(rep.E0) + "; " + std::to_string(rep.certified) + " certified, " +
                          std::to_string(rep.in_Z) + " in Z_eps, " + std::to_string(rep.used) + " used");
  suite.info("c0", fmt15(rep.c0));
  if (rep.insufficient) {
    suite.info("insufficient_data", std::to_string(rep.used) + " used pairs, " + std::to_string(config.min_pairs) +
                                        " required");
  } else {
    suite.check("cross_validation", rep.validation <= 1.1,
                "C_fit = " + fmt15(rep.C_fit) + ", upper-half max ratio / (C_fit E^rho) = " + fmt15(rep.validation));
    const double limit = to_double(rep.rho) + 0.1;
    suite.check("ratio_slope", rep.ratio_slope <= limit,
                "Theil-Sen slope " + fmt15(rep.ratio_slope) + " <= rho + 0.1 = " + fmt15(limit));
  }
  suite.info("C_plus_slope", fmt15(rep.large_slope));
  suite.info("C_minus_slope", fmt15(rep.small_slope));
  suite.info("C_plus_mode_slope", fmt15(rep.large_mode_slope));
  suite.info("C_minus_mode_slope", fmt15(rep.small_mode_slope));
  suite.info("max_ratio_used", fmt15(rep.max_ratio_used));
  suite.info("max_ratio_excluded", fmt15(rep.max_ratio_excluded));
  result.files.push_back(write_output(config, "bounds.csv", bound_csv(rep)));
  result.files.push_back(write_output(config, "bounds_summary.json", bound_summary_json(rep)));
  return rep;
}

CommandResult finish(const Suite& suite, CommandResult result, const RunConfig& config, const std::string& name,
                     bool insufficient = false) {
  result.files.push_back(write_output(config, "verify_" + name + ".json", suite.json().dump(2) + "\n"));
  result.text += suite.text();
  if (suite.failed() > 0)
    result.exit_code = kExitFail;
  else if (insufficient)
    result.exit_code = kExitInsufficient;
  return result;
}

}  // namespace

BilliardProfile RunConfig::build_profile() const {
  require(profile.count("kind"), ErrorKind::Parameter, "config lacks profile.kind");
  return BilliardProfile::from_record(profile);
}

std::string RunConfig::resolved_cache_path() const {
  return cache_path.empty() ? (std::filesystem::path(out_dir) / "eigenpairs.cache").string() : cache_path;
}

int RunConfig::resolved_jobs() const {
  if (jobs > 0) return jobs;
  return std::max(1, int(std::thread::hardware_concurrency()));
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  static const char* const kProfileKeys[] = {"kind", "L0", "B0", "B1", "gamma", "c_L", "truncation_fraction"};
  if (key.rfind("profile.", 0) == 0) {
    const std::string sub = key.substr(8);
    if (std::find(std::begin(kProfileKeys), std::end(kProfileKeys), sub) == std::end(kProfileKeys))
      fail(ErrorKind::Format, "unknown key '" + key + "'");
    if (sub == "kind")
      (void)profile_kind_from_string(value);
    else
      (void)parse_double(value, key);
    c.profile[sub] = value;
    return;
  }
  auto d = [&] { return parse_double(value, key); };
  auto i = [&] { return parse_int(value, key); };
  auto u = [&] { return std::uint64_t(parse_long(value, key)); };
  if (key == "grid.ns") c.ns = i();
  else if (key == "grid.nt") c.nt = i();
  else if (key == "solver.residual_tol") c.solver.residual_tol = d();
  else if (key == "solver.block_size") c.solver.block_size = i();
  else if (key == "solver.max_restarts") c.solver.max_restarts = i();
  else if (key == "solver.seed") c.solver.seed = u();
  else if (key == "certify") c.certify = parse_bool(value, key);
  else if (key == "certify.tol") c.cert_tol = d();
  else if (key == "window.lo") c.window_lo = d();
  else if (key == "window.hi") c.window_hi = d();
  else if (key == "eps") c.eps = parse_list(value, key);
  else if (key == "c0") c.c0 = d();
  else if (key == "beta") c.beta = d();
  else if (key == "M_large") c.M_large = d();
  else if (key == "M_small") c.M_small = d();
  else if (key == "b0") c.b0 = d();
  else if (key == "E0") c.E0 = d();
  else if (key == "kmax_extra") c.kmax_extra = i();
  else if (key == "min_pairs") c.min_pairs = i();
  else if (key == "output.dir") c.out_dir = value;
  else if (key == "cache.path") c.cache_path = value;
  else if (key == "jobs") c.jobs = i();
  else if (key == "onedim.samples") c.onedim_samples = i();
  else if (key == "onedim.seed") c.onedim_seed = u();
  else if (key == "forms.random_v") c.forms_random_v = i();
  else if (key == "forms.seed") c.forms_seed = u();
  else fail(ErrorKind::Format, "unknown key '" + key + "'");

  require(c.solver.residual_tol > 0 && c.cert_tol > 0, ErrorKind::Format, key + ": tolerances must be positive");
  require(c.ns >= 0 && c.nt >= 0 && c.jobs >= 0 && c.kmax_extra >= 0 && c.min_pairs >= 1, ErrorKind::Format,
          key + ": value out of range");
  require(c.M_large > 0 && c.M_small > 0, ErrorKind::Format, key + ": M_large and M_small must be positive");
  require(c.onedim_samples >= 1 && c.forms_random_v >= 0, ErrorKind::Format, key + ": value out of range");
  for (double e : c.eps) require(e >= 0, ErrorKind::Format, key + ": eps must be non-negative");
}

RunConfig parse_config(std::string_view text, const std::string& source) {
  RunConfig c;
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Format, where + "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail(ErrorKind::Format, where + "empty key or value");
    if (seen.count(key)) {
      fail(ErrorKind::Format, where + "key '" + key + "' already set on line " + std::to_string(seen[key]));
    }
    seen[key] = line_no;
    try {
      set_config_value(c, key, value);
    } catch (const Error& e) {
      fail(ErrorKind::Format, where + e.what());
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Io, "cannot read config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

CommandResult cmd_validate(const RunConfig& config) {
  CommandResult result;
  nlohmann::ordered_json j;
  try {
    const BilliardProfile profile = config.build_profile();
    const ProfileReport rep = validate(profile);
    result.text = "validate " + std::string(to_string(profile.kind())) + "\n";
    for (const auto& c : rep.checks) {
      const char* tag = !c.applicable ? "  n/a  " : c.passed ? "  PASS " : "  FAIL ";
      result.text += tag + c.name + ": " + c.detail + " (measured " + fmt15(c.measured) + ")\n";
    }
    result.files.push_back(write_output(config, "validate.json", rep.to_json()));
    result.exit_code = rep.all_passed() ? kExitPass : kExitFail;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Parameter) throw;
    // Inadmissible parameters are a validation verdict, not a usage error.
    result.text = "validate\n  FAIL construction: " + std::string(e.what()) + "\n";
    j["all_passed"] = false;
    j["error"] = e.what();
    result.files.push_back(write_output(config, "validate.json", j.dump(2) + "\n"));
    result.exit_code = kExitFail;
  }
  return result;
}

CommandResult cmd_spectrum(const RunConfig& config) {
  require_grid(config);
  require_window(config);
  CommandResult result;
  const BilliardProfile profile = config.build_profile();
  EigenCache cache = open_cache(config, profile, false);
  std::string log;
  if (extend_cache(config, profile, cache, log) > 0) {
    std::filesystem::path cp(config.resolved_cache_path());
    if (cp.has_parent_path()) std::filesystem::create_directories(cp.parent_path());
    write_cache(cp.string(), cache);
    result.files.push_back(cp.string());
  } else {
    log += "window already cached\n";
  }
  const auto pairs = cache.in_window(config.window_lo, config.window_hi);
  const double c0 = resolve_c0(config, profile, pairs);
  int certified = 0;
  for (const auto* p : pairs) certified += is_certified(*p, config.cert_tol);
  result.files.push_back(write_output(config, "spectrum.csv", spectrum_csv(config, profile, pairs, c0)));
  result.text = "spectrum [" + fmt15(config.window_lo) + ", " + fmt15(config.window_hi) + ")\n" + log +
                std::to_string(pairs.size()) + " pairs, " + std::to_string(certified) + " certified, c0 = " +
                fmt15(c0) + "\n";
  return result;
}

CommandResult cmd_verify(const RunConfig& config, std::string_view which) {
  CommandResult result;
  if (which == "onedim") {
    Suite suite("onedim");
    onedim_suite(config, suite, result);
    return finish(suite, std::move(result), config, "onedim");
  }
  if (which == "forms") {
    Suite suite("forms");
    forms_suite(config, suite, result);
    return finish(suite, std::move(result), config, "forms");
  }
  if (which == "bounds") {
    Suite suite("bounds");
    const BoundReport rep = bounds_suite(config, suite, result);
    return finish(suite, std::move(result), config, "bounds", rep.insufficient);
  }
  fail(ErrorKind::Parameter, "unknown suite '" + std::string(which) + "' (expected onedim, forms or bounds)");
}

CommandResult cmd_sweep(const RunConfig& config) {
  CommandResult result = cmd_spectrum(config);
  Suite suite("bounds");
  const BoundReport rep = bounds_suite(config, suite, result);
  const BilliardProfile profile = config.build_profile();
  const double beta = config.beta > 0 ? config.beta : kPi / (2.0 * profile.B0());
  std::string csv = resonance_csv_header(config.eps) + "\n";
  for (const auto& r : rep.rows) csv += resonance_csv_row(resonance_report(r.E, profile.L0(), profile.B0(), config.eps, rep.c0 > 0 ? rep.c0 : 1.0, beta)) + "\n";
  result.files.push_back(write_output(config, "resonance.csv", csv));
  return finish(suite, std::move(result), config, "bounds", rep.insufficient);
}

}  // namespace billiard
