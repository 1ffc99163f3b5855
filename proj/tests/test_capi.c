/* Copyright 2026 The billiard-lab Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Exercises libbilliard through its C header only.
 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "billiard/billiard.h"

static int failures = 0;

#define EXPECT(cond)                                            \
  do {                                                          \
    if (!(cond)) {                                              \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                               \
    }                                                           \
  } while (0)

int main(void) {
  billiard_profile* p = NULL;
  double w = 0.0;
  EXPECT(billiard_profile_quarter_stadium(1.0, 0.95, 1.0, &p) == BILLIARD_OK);
  EXPECT(billiard_profile_width(p, 0.95, &w) == BILLIARD_OK);
  EXPECT(fabs(w - sqrt(1.0 - 0.9025)) < 1e-12);

  int ok = 0;
  char* json = NULL;
  EXPECT(billiard_profile_validate(p, &ok, &json) == BILLIARD_OK);
  EXPECT(ok == 1);
  EXPECT(json != NULL && json[0] == '{');
  billiard_string_free(json);
  billiard_profile_free(p);

  billiard_profile* bad = NULL;
  EXPECT(billiard_profile_power(1.0, 1.0, 0.5, 1.4, 0.5, &bad) == BILLIARD_ERR_PARAMETER);
  EXPECT(bad == NULL);
  EXPECT(strstr(billiard_last_error(), "3/2") != NULL);
  EXPECT(strcmp(billiard_status_name(BILLIARD_ERR_PARAMETER), "parameter") == 0);
  EXPECT(billiard_profile_width(NULL, 0.0, &w) == BILLIARD_ERR_ARGUMENT);

  billiard_profile* rect = NULL;
  billiard_spectrum* spec = NULL;
  EXPECT(billiard_profile_rectangle(1.0, 1.0, 1.0, &rect) == BILLIARD_OK);
  EXPECT(billiard_solve(rect, 64, 32, 10.0, 60.0, 0.0, &spec) == BILLIARD_OK);
  EXPECT(billiard_spectrum_size(spec) == 6);
  double E = 0.0, res = 1.0, ratio = 0.0;
  long index = -1;
  EXPECT(billiard_spectrum_pair(spec, 0, &E, &res, &index) == BILLIARD_OK);
  EXPECT(fabs(E - 1.25 * M_PI * M_PI) / E < 0.01);
  EXPECT(res < 1e-8);
  EXPECT(index == 0);
  EXPECT(billiard_spectrum_ratio(spec, 0, &ratio) == BILLIARD_OK);
  EXPECT(ratio >= 1.0);
  EXPECT(billiard_spectrum_pair(spec, 6, &E, NULL, NULL) == BILLIARD_ERR_ARGUMENT);
  billiard_spectrum_free(spec);
  billiard_profile_free(rect);

  long num = 0, den = 0;
  EXPECT(billiard_rho(2, 1, 0, 1, &num, &den) == BILLIARD_OK);
  EXPECT(num == 5 && den == 6);
  EXPECT(billiard_rho(2, 1, 1, 8, &num, &den) == BILLIARD_OK);
  EXPECT(num == 1 && den == 1);
  EXPECT(billiard_rho(7, 5, 0, 1, &num, &den) == BILLIARD_ERR_PARAMETER);

  double nu = 0.0;
  EXPECT(billiard_nu(3.7, M_PI, M_PI, &nu) == BILLIARD_OK);
  EXPECT(fabs(nu - 1.3) < 1e-12);

  billiard_config* cfg = NULL;
  EXPECT(billiard_config_parse("bogus = 1\n", &cfg) == BILLIARD_ERR_FORMAT);
  EXPECT(billiard_config_parse("profile.kind = constant-rectangle\nprofile.L0 = 1\nprofile.B0 = 1\n"
                               "profile.B1 = 1\n",
                               &cfg) == BILLIARD_OK);
  EXPECT(billiard_config_set(cfg, "output.dir", "capi_out") == BILLIARD_OK);
  EXPECT(billiard_config_set(cfg, "nope", "1") == BILLIARD_ERR_FORMAT);
  int code = -1;
  char* report = NULL;
  EXPECT(billiard_run(cfg, "validate", NULL, &code, &report) == BILLIARD_OK);
  EXPECT(code == BILLIARD_EXIT_PASS);
  EXPECT(report != NULL && strstr(report, "validate.json") != NULL);
  billiard_string_free(report);
  EXPECT(billiard_run(cfg, "frobnicate", NULL, &code, NULL) == BILLIARD_ERR_PARAMETER);
  billiard_config_free(cfg);

  if (failures) fprintf(stderr, "%d failures\n", failures);
  else printf("all C API checks passed (libbilliard %s)\n", billiard_version());
  return failures ? 1 : 0;
}
