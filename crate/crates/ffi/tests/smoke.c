#include <stdio.h>
#include <string.h>

#include "amenlab.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  AmenPlane *plane = NULL;
  size_t n = 0;
  CHECK(amen_plane_new(2, &plane) == AMEN_STATUS_OK);
  CHECK(amen_plane_len(plane, &n) == AMEN_STATUS_OK && n == 7);
  amen_plane_free(plane);

  CHECK(amen_plane_new(9, &plane) == AMEN_STATUS_NOT_PRIME);
  CHECK(strstr(amen_last_error_message(), "not a prime") != NULL);

  double re[4] = {3.0, 0.0, 0.0, -4.0};
  AmenMatrix *m = NULL;
  double v = 0.0;
  CHECK(amen_matrix_new(2, 2, re, NULL, &m) == AMEN_STATUS_OK);
  CHECK(amen_matrix_schatten(m, 1, &v) == AMEN_STATUS_OK && v > 6.999 && v < 7.001);
  amen_matrix_free(m);

  AmenReport *report = NULL;
  bool passed = false;
  char *json = NULL;
  CHECK(amen_run_experiment("spectral", "{\"graph\": \"petersen\"}", &report) == AMEN_STATUS_OK);
  CHECK(amen_report_passed(report, &passed) == AMEN_STATUS_OK && passed);
  CHECK(amen_report_json(report, &json) == AMEN_STATUS_OK);
  CHECK(strstr(json, "\"experiment\": \"cayley-spectrum\"") != NULL);
  amen_string_free(json);
  amen_report_free(report);

  printf("ok %s\n", amen_version());
  return 0;
}
