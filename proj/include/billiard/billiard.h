/* Copyright 2026 The billiard-lab Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of libbilliard. Every function returns a billiard_status; on
 * failure the message is available from billiard_last_error() on the same
 * thread until the next failing call. Handles are opaque and owned by the
 * caller; strings returned through char** are freed with billiard_string_free.
 */
#ifndef BILLIARD_H
#define BILLIARD_H

#include <stddef.h>

#if defined(BILLIARD_BUILDING)
#define BILLIARD_API __attribute__((visibility("default")))
#else
#define BILLIARD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum billiard_status {
  BILLIARD_OK = 0,
  BILLIARD_ERR_PARAMETER = 1,
  BILLIARD_ERR_REGIME = 2,
  BILLIARD_ERR_CONVERGENCE = 3,
  BILLIARD_ERR_DEGENERATE = 4,
  BILLIARD_ERR_RESOLUTION = 5,
  BILLIARD_ERR_PRECONDITION = 6,
  BILLIARD_ERR_EMPTY_REGION = 7,
  BILLIARD_ERR_NOT_A_SOLUTION = 8,
  BILLIARD_ERR_IO = 9,
  BILLIARD_ERR_FORMAT = 10,
  BILLIARD_ERR_INTERNAL = 11,
  BILLIARD_ERR_ARGUMENT = 12 /* null pointer or index out of range */
} billiard_status;

/* Exit codes of billiard_run. */
#define BILLIARD_EXIT_PASS 0
#define BILLIARD_EXIT_FAIL 1
#define BILLIARD_EXIT_USAGE 2
#define BILLIARD_EXIT_INSUFFICIENT 3

BILLIARD_API const char* billiard_version(void);
BILLIARD_API const char* billiard_status_name(billiard_status status);
BILLIARD_API const char* billiard_last_error(void);
BILLIARD_API void billiard_string_free(char* s);

/* Width profiles. */
typedef struct billiard_profile billiard_profile;
BILLIARD_API billiard_status billiard_profile_quarter_stadium(double L0, double truncation_fraction, double B0,
                                                              billiard_profile** out);
BILLIARD_API billiard_status billiard_profile_power(double L0, double B0, double B1, double gamma, double c_L,
                                                    billiard_profile** out);
BILLIARD_API billiard_status billiard_profile_rectangle(double L0, double B0, double B1, billiard_profile** out);
BILLIARD_API void billiard_profile_free(billiard_profile* profile);
BILLIARD_API billiard_status billiard_profile_width(const billiard_profile* profile, double x, double* out);
/* all_passed receives 0 or 1; json (optional) receives the validation report. */
BILLIARD_API billiard_status billiard_profile_validate(const billiard_profile* profile, int* all_passed, char** json);

/* Eigenpairs with E in [lo, hi) on an ns x nt grid. */
typedef struct billiard_spectrum billiard_spectrum;
BILLIARD_API billiard_status billiard_solve(const billiard_profile* profile, int ns, int nt, double lo, double hi,
                                            double residual_tol, billiard_spectrum** out);
BILLIARD_API size_t billiard_spectrum_size(const billiard_spectrum* spectrum);
/* Any of E, residual, index may be NULL. index is the 0-based position in the full spectrum. */
BILLIARD_API billiard_status billiard_spectrum_pair(const billiard_spectrum* spectrum, size_t i, double* E,
                                                    double* residual, long* index);
/* ||u||_{L2(Omega)} / ||u||_{L2(W)} of pair i. */
BILLIARD_API billiard_status billiard_spectrum_ratio(const billiard_spectrum* spectrum, size_t i, double* ratio);
BILLIARD_API void billiard_spectrum_free(billiard_spectrum* spectrum);

/* Exponent rho(gamma, eps) as an exact fraction num/den. */
BILLIARD_API billiard_status billiard_rho(long gamma_num, long gamma_den, long eps_num, long eps_den, long* num,
                                          long* den);
/* Distance from E to the Dirichlet spectrum of the rectangle [-B0, 0] x [0, L0]. */
BILLIARD_API billiard_status billiard_nu(double E, double L0, double B0, double* out);

/* Run configuration (flat key = value text; see the README for the keys). */
typedef struct billiard_config billiard_config;
BILLIARD_API billiard_status billiard_config_new(billiard_config** out);
BILLIARD_API billiard_status billiard_config_load(const char* path, billiard_config** out);
BILLIARD_API billiard_status billiard_config_parse(const char* text, billiard_config** out);
BILLIARD_API billiard_status billiard_config_set(billiard_config* config, const char* key, const char* value);
BILLIARD_API void billiard_config_free(billiard_config* config);

/* command: validate | spectrum | verify | sweep; suite: onedim | forms | bounds
 * for verify, ignored otherwise. exit_code receives one of BILLIARD_EXIT_*;
 * report (optional) receives the human-readable report and the written files. */
BILLIARD_API billiard_status billiard_run(const billiard_config* config, const char* command, const char* suite,
                                          int* exit_code, char** report);

#ifdef __cplusplus
}
#endif

#endif /* BILLIARD_H */
