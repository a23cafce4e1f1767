#ifndef AETHERCAST_H
#define AETHERCAST_H

#include <stddef.h>

#if defined(_WIN32)
#define AC_API __declspec(dllexport)
#else
#define AC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns AC_OK or an error; the message for the most recent
 * failure on the calling thread is available from ac_last_error(). */
typedef enum ac_status {
  AC_OK = 0,
  AC_ERR_CONFIG = 1,           /* unknown key, invalid value, missing API key */
  AC_ERR_INVALID_ARGUMENT = 2, /* null handle or violated precondition */
  AC_ERR_IO = 3,
  AC_ERR_PARSE = 4,   /* malformed CSV, JSON or provider payload */
  AC_ERR_NETWORK = 5, /* HTTP failure or empty provider range */
  AC_ERR_DATA = 6,    /* grid, column or length problems in the data */
  AC_ERR_MODEL = 7,   /* fitting or forecasting failed */
  AC_ERR_EMPTY_RUN = 8,
  AC_ERR_INTERNAL = 9
} ac_status;

typedef struct ac_config ac_config;
typedef struct ac_frame ac_frame;
typedef struct ac_report ac_report;

typedef struct ac_summary {
  double mae;
  double rmse;
  double pooled_rmse;
  double base_mae;
  double base_rmse;
  size_t windows;
  size_t best_week;
  size_t worst_week;
  int partial;
  size_t failed_week; /* 0 when the run completed */
  double seconds;
} ac_summary;

typedef struct ac_window_score {
  size_t week;
  double mae;
  double rmse;
  double base_mae;
  double base_rmse;
  double bias;
} ac_window_score;

AC_API const char* ac_version(void);
AC_API const char* ac_status_name(ac_status status);
/* Empty string when no error happened on this thread. Valid until the next
 * failing call on the same thread. */
AC_API const char* ac_last_error(void);
/* Frees strings returned through char** out-parameters. */
AC_API void ac_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */
AC_API ac_status ac_config_new(ac_config** out);
/* Parses a key = value file; NULL path gives the defaults. */
AC_API ac_status ac_config_load(const char* path, ac_config** out);
AC_API ac_status ac_config_set(ac_config* cfg, const char* key, const char* value);
AC_API ac_status ac_config_validate(const ac_config* cfg);
AC_API ac_status ac_config_to_json(const ac_config* cfg, char** out_json);
AC_API ac_status ac_config_keys(char** out_json);
AC_API void ac_config_free(ac_config* cfg);

/* ---- data -------------------------------------------------------------- */
/* Loads from the configured source (csv, fetch or synthetic). */
AC_API ac_status ac_frame_load(const ac_config* cfg, ac_frame** out);
AC_API ac_status ac_frame_load_csv(const char* path, ac_frame** out);
AC_API ac_status ac_frame_save_csv(const ac_frame* frame, const char* path);
AC_API ac_status ac_frame_shape(const ac_frame* frame, size_t* rows, size_t* cols);
/* Borrowed pointer valid while the frame lives. */
AC_API ac_status ac_frame_column(const ac_frame* frame, const char* name, const double** data, size_t* n);
AC_API ac_status ac_frame_weekly_windows(const ac_frame* frame, double split_ratio, size_t* windows);
AC_API void ac_frame_free(ac_frame* frame);

/* ---- workflow stages ---------------------------------------------------- */
AC_API ac_status ac_fetch(const ac_config* cfg, const char* out_csv);
AC_API ac_status ac_synth(const ac_config* cfg, const char* out_csv);
AC_API ac_status ac_prepare(const ac_config* cfg, const char* out_dir);
/* Writes relevance.csv/.svg and selection.json; returns the ranking as a
 * JSON array when out_json is not NULL. */
AC_API ac_status ac_select_features(const ac_config* cfg, const char* out_dir, char** out_json);

/* Runs the configured (model, regime) pair and emits its report. */
AC_API ac_status ac_run(const ac_config* cfg, const char* out_dir, ac_report** out);
/* Rebuilds a report from an existing run directory and rewrites its files. */
AC_API ac_status ac_report_reemit(const char* run_dir, ac_report** out);
AC_API ac_status ac_report_summary(const ac_report* report, ac_summary* out);
AC_API ac_status ac_report_window_count(const ac_report* report, size_t* n);
AC_API ac_status ac_report_window(const ac_report* report, size_t index, ac_window_score* out);
AC_API ac_status ac_report_to_json(const ac_report* report, char** out_json);
AC_API void ac_report_free(ac_report* report);

/* Three models x {walkforward, frozen-corrected}. reference_csv may be NULL.
 * out_markdown (optional) receives the comparison table. */
AC_API ac_status ac_bench(const ac_config* cfg, const char* out_dir, const char* reference_csv, char** out_markdown);

#ifdef __cplusplus
}
#endif

#endif /* AETHERCAST_H */
