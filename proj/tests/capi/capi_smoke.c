/* Consumes the public header from plain C. */
#include <stdio.h>
#include <string.h>

#include "aethercast/aethercast.h"

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: %s failed (%s)\n", __FILE__, __LINE__, \
              #cond, ac_last_error());                            \
      return 1;                                                   \
    }                                                             \
  } while (0)

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : "capi_smoke_out";
  char path[1024];
  ac_config* cfg = NULL;
  ac_frame* frame = NULL;
  ac_report* report = NULL;
  ac_summary summary;
  size_t rows = 0, cols = 0, windows = 0, n = 0;
  const double* y = NULL;
  char* json = NULL;

  EXPECT(ac_config_new(&cfg) == AC_OK);
  EXPECT(ac_config_set(cfg, "alpha", "1.5") == AC_OK);
  EXPECT(ac_config_validate(cfg) == AC_ERR_CONFIG);
  EXPECT(strstr(ac_last_error(), "alpha") != NULL);
  EXPECT(ac_config_set(cfg, "alpha", "0.3") == AC_OK);
  EXPECT(ac_config_set(cfg, "no_such_key", "1") == AC_ERR_CONFIG);
  EXPECT(ac_config_set(NULL, "alpha", "0.3") == AC_ERR_INVALID_ARGUMENT);

  EXPECT(ac_config_set(cfg, "source", "synthetic") == AC_OK);
  EXPECT(ac_config_set(cfg, "synthetic_train_hours", "1440") == AC_OK);
  EXPECT(ac_config_set(cfg, "synthetic_test_weeks", "3") == AC_OK);
  EXPECT(ac_config_set(cfg, "regime", "frozen-corrected") == AC_OK);
  EXPECT(ac_config_validate(cfg) == AC_OK);

  EXPECT(ac_frame_load(cfg, &frame) == AC_OK);
  EXPECT(ac_frame_shape(frame, &rows, &cols) == AC_OK);
  EXPECT(rows == 1440 + 3 * 168);
  EXPECT(cols == 10);
  EXPECT(ac_frame_column(frame, "pm2_5", &y, &n) == AC_OK);
  EXPECT(n == rows && y != NULL);
  EXPECT(ac_frame_column(frame, "ozone", &y, &n) == AC_ERR_DATA);
  EXPECT(ac_frame_weekly_windows(frame, 0.5, &windows) == AC_OK);
  EXPECT(windows == (rows - rows / 2) / 168);
  ac_frame_free(frame);

  snprintf(path, sizeof path, "%s/run", dir);
  EXPECT(ac_run(cfg, path, &report) == AC_OK);
  EXPECT(ac_report_summary(report, &summary) == AC_OK);
  EXPECT(summary.windows == 3);
  EXPECT(summary.mae <= summary.rmse);
  EXPECT(summary.partial == 0);
  EXPECT(ac_report_to_json(report, &json) == AC_OK);
  EXPECT(strstr(json, "\"frozen-corrected\"") != NULL);
  ac_string_free(json);
  ac_report_free(report);

  EXPECT(ac_report_reemit("/nonexistent/run", &report) == AC_ERR_IO);
  EXPECT(strlen(ac_last_error()) > 0);
  printf("capi smoke ok (%s)\n", ac_version());
  ac_config_free(cfg);
  return 0;
}
