// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "billiard/billiard.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "billiard/bounds.hpp"
#include "billiard/discretize.hpp"
#include "billiard/error.hpp"
#include "billiard/geometry.hpp"
#include "billiard/pipeline.hpp"
#include "billiard/resonance.hpp"

struct billiard_profile {
  billiard::BilliardProfile profile;
};

struct billiard_spectrum {
  billiard::TensorGrid grid;
  std::vector<billiard::EigenPair> pairs;
};

struct billiard_config {
  billiard::RunConfig config;
};

namespace {

thread_local std::string g_last_error;

billiard_status status_of(billiard::ErrorKind kind) {
  using billiard::ErrorKind;
  switch (kind) {
    case ErrorKind::Parameter: return BILLIARD_ERR_PARAMETER;
    case ErrorKind::Regime: return BILLIARD_ERR_REGIME;
    case ErrorKind::Convergence: return BILLIARD_ERR_CONVERGENCE;
    case ErrorKind::Degenerate: return BILLIARD_ERR_DEGENERATE;
    case ErrorKind::Resolution: return BILLIARD_ERR_RESOLUTION;
    case ErrorKind::Precondition: return BILLIARD_ERR_PRECONDITION;
    case ErrorKind::EmptyRegion: return BILLIARD_ERR_EMPTY_REGION;
    case ErrorKind::NotASolution: return BILLIARD_ERR_NOT_A_SOLUTION;
    case ErrorKind::Io: return BILLIARD_ERR_IO;
    case ErrorKind::Format: return BILLIARD_ERR_FORMAT;
    case ErrorKind::Internal: return BILLIARD_ERR_INTERNAL;
  }
  return BILLIARD_ERR_INTERNAL;
}

billiard_status set_error(billiard_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs body, translating exceptions into status codes.
template <class Body>
billiard_status guarded(Body&& body) {
  try {
    body();
    return BILLIARD_OK;
  } catch (const billiard::Error& e) {
    return set_error(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(BILLIARD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(BILLIARD_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define BILLIARD_REQUIRE_ARG(cond, what) \
  if (!(cond)) return set_error(BILLIARD_ERR_ARGUMENT, what)

}  // namespace

extern "C" {

const char* billiard_version(void) { return "1.0.0"; }

const char* billiard_status_name(billiard_status status) {
  switch (status) {
    case BILLIARD_OK: return "ok";
    case BILLIARD_ERR_PARAMETER: return "parameter";
    case BILLIARD_ERR_REGIME: return "regime";
    case BILLIARD_ERR_CONVERGENCE: return "convergence";
    case BILLIARD_ERR_DEGENERATE: return "degenerate";
    case BILLIARD_ERR_RESOLUTION: return "resolution";
    case BILLIARD_ERR_PRECONDITION: return "precondition";
    case BILLIARD_ERR_EMPTY_REGION: return "empty-region";
    case BILLIARD_ERR_NOT_A_SOLUTION: return "not-a-solution";
    case BILLIARD_ERR_IO: return "io";
    case BILLIARD_ERR_FORMAT: return "format";
    case BILLIARD_ERR_INTERNAL: return "internal";
    case BILLIARD_ERR_ARGUMENT: return "argument";
  }
  return "unknown";
}

const char* billiard_last_error(void) { return g_last_error.c_str(); }

void billiard_string_free(char* s) { std::free(s); }

billiard_status billiard_profile_quarter_stadium(double L0, double truncation_fraction, double B0,
                                                 billiard_profile** out) {
  BILLIARD_REQUIRE_ARG(out, "out is null");
  return guarded([&] {
    *out = new billiard_profile{billiard::make_truncated_quarter_stadium(L0, truncation_fraction, B0)};
  });
}

billiard_status billiard_profile_power(double L0, double B0, double B1, double gamma, double c_L,
                                       billiard_profile** out) {
  BILLIARD_REQUIRE_ARG(out, "out is null");
  return guarded([&] { *out = new billiard_profile{billiard::make_power_profile(L0, B0, B1, gamma, c_L)}; });
}

billiard_status billiard_profile_rectangle(double L0, double B0, double B1, billiard_profile** out) {
  BILLIARD_REQUIRE_ARG(out, "out is null");
  return guarded([&] { *out = new billiard_profile{billiard::make_constant_rectangle(L0, B0, B1)}; });
}

void billiard_profile_free(billiard_profile* profile) { delete profile; }

billiard_status billiard_profile_width(const billiard_profile* profile, double x, double* out) {
  BILLIARD_REQUIRE_ARG(profile && out, "null argument");
  return guarded([&] { *out = profile->profile.width(x); });
}

billiard_status billiard_profile_validate(const billiard_profile* profile, int* all_passed, char** json) {
  BILLIARD_REQUIRE_ARG(profile && all_passed, "null argument");
  return guarded([&] {
    const auto rep = billiard::validate(profile->profile);
    if (json) *json = dup_string(rep.to_json());
    *all_passed = rep.all_passed() ? 1 : 0;
  });
}

billiard_status billiard_solve(const billiard_profile* profile, int ns, int nt, double lo, double hi,
                               double residual_tol, billiard_spectrum** out) {
  BILLIARD_REQUIRE_ARG(profile && out, "null argument");
  return guarded([&] {
    billiard::TensorGrid grid(profile->profile, ns, nt);
    const auto forms = billiard::assemble_forms(grid);
    billiard::SolverOptions opts;
    if (residual_tol > 0) opts.residual_tol = residual_tol;
    auto pairs = billiard::solve_eigenpairs(forms, lo, hi, opts);
    *out = new billiard_spectrum{std::move(grid), std::move(pairs)};
  });
}

size_t billiard_spectrum_size(const billiard_spectrum* spectrum) { return spectrum ? spectrum->pairs.size() : 0; }

billiard_status billiard_spectrum_pair(const billiard_spectrum* spectrum, size_t i, double* E, double* residual,
                                       long* index) {
  BILLIARD_REQUIRE_ARG(spectrum, "spectrum is null");
  BILLIARD_REQUIRE_ARG(i < spectrum->pairs.size(), "pair index out of range");
  const auto& p = spectrum->pairs[i];
  if (E) *E = p.E;
  if (residual) *residual = p.residual;
  if (index) *index = p.index;
  return BILLIARD_OK;
}

billiard_status billiard_spectrum_ratio(const billiard_spectrum* spectrum, size_t i, double* ratio) {
  BILLIARD_REQUIRE_ARG(spectrum && ratio, "null argument");
  BILLIARD_REQUIRE_ARG(i < spectrum->pairs.size(), "pair index out of range");
  return guarded([&] {
    const auto& g = spectrum->grid;
    const auto& U = spectrum->pairs[i].U;
    const double all = billiard::integrate_region(g, U, U, billiard::all_cells(g)).mass;
    const double wing = billiard::restrict_norm(g, U, 0.0, g.profile().B1()).value;
    billiard::require(wing > 0, billiard::ErrorKind::EmptyRegion, "eigenfunction vanishes on the wing");
    *ratio = std::sqrt(all / wing);
  });
}

void billiard_spectrum_free(billiard_spectrum* spectrum) { delete spectrum; }

billiard_status billiard_rho(long gamma_num, long gamma_den, long eps_num, long eps_den, long* num, long* den) {
  BILLIARD_REQUIRE_ARG(num && den, "null argument");
  BILLIARD_REQUIRE_ARG(gamma_den > 0 && eps_den > 0, "denominators must be positive");
  return guarded([&] {
    const auto r = billiard::rho(billiard::Rational(gamma_num, gamma_den), billiard::Rational(eps_num, eps_den));
    *num = long(r.numerator());
    *den = long(r.denominator());
  });
}

billiard_status billiard_nu(double E, double L0, double B0, double* out) {
  BILLIARD_REQUIRE_ARG(out, "out is null");
  return guarded([&] {
    billiard::require(L0 > 0 && B0 > 0, billiard::ErrorKind::Parameter, "rectangle sides must be positive");
    *out = billiard::nu(E, L0, B0).value;
  });
}

billiard_status billiard_config_new(billiard_config** out) {
  BILLIARD_REQUIRE_ARG(out, "out is null");
  return guarded([&] { *out = new billiard_config{}; });
}

billiard_status billiard_config_load(const char* path, billiard_config** out) {
  BILLIARD_REQUIRE_ARG(path && out, "null argument");
  return guarded([&] { *out = new billiard_config{billiard::load_config(path)}; });
}

billiard_status billiard_config_parse(const char* text, billiard_config** out) {
  BILLIARD_REQUIRE_ARG(text && out, "null argument");
  return guarded([&] { *out = new billiard_config{billiard::parse_config(text)}; });
}

billiard_status billiard_config_set(billiard_config* config, const char* key, const char* value) {
  BILLIARD_REQUIRE_ARG(config && key && value, "null argument");
  return guarded([&] { billiard::set_config_value(config->config, key, value); });
}

void billiard_config_free(billiard_config* config) { delete config; }

billiard_status billiard_run(const billiard_config* config, const char* command, const char* suite, int* exit_code,
                             char** report) {
  BILLIARD_REQUIRE_ARG(config && command && exit_code, "null argument");
  return guarded([&] {
    const std::string cmd = command;
    billiard::CommandResult r;
    if (cmd == "validate") {
      r = billiard::cmd_validate(config->config);
    } else if (cmd == "spectrum") {
      r = billiard::cmd_spectrum(config->config);
    } else if (cmd == "verify") {
      billiard::require(suite != nullptr, billiard::ErrorKind::Parameter, "verify needs a suite");
      r = billiard::cmd_verify(config->config, suite);
    } else if (cmd == "sweep") {
      r = billiard::cmd_sweep(config->config);
    } else {
      billiard::fail(billiard::ErrorKind::Parameter, "unknown command '" + cmd + "'");
    }
    std::string text = r.text;
    for (const auto& f : r.files) text += "wrote " + f + "\n";
    if (report) *report = dup_string(text);
    *exit_code = r.exit_code;
  });
}

}  // extern "C"
