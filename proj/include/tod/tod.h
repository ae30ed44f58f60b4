/* Teleoperated-driving core: C interface. */
#ifndef TOD_TOD_H
#define TOD_TOD_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(TOD_BUILDING_LIBRARY)
#define TOD_API __attribute__((visibility("default")))
#else
#define TOD_API
#endif

typedef enum tod_status {
  TOD_OK = 0,
  TOD_ERR_INVALID_ARGUMENT = 1,
  TOD_ERR_PARSE = 2,
  TOD_ERR_VALIDATION = 3,
  TOD_ERR_IO = 4,
  TOD_ERR_ABORTED = 5,
  TOD_ERR_CODEC = 6,
  TOD_ERR_CLOSED = 7,
  TOD_ERR_INTERNAL = 8
} tod_status;

typedef struct tod_scenario tod_scenario;
typedef struct tod_run tod_run;

/* Message of the last failing call on this thread; never NULL. */
TOD_API const char* tod_last_error(void);
TOD_API const char* tod_status_name(tod_status status);
TOD_API const char* tod_version(void);

/* Scenario files. */
TOD_API tod_status tod_scenario_load(const char* path, tod_scenario** out);
TOD_API tod_status tod_scenario_set_seed(tod_scenario* scenario, uint64_t seed);
TOD_API tod_status tod_scenario_seed(const tod_scenario* scenario, uint64_t* out);
TOD_API tod_status tod_scenario_name(const tod_scenario* scenario, const char** out);
TOD_API void tod_scenario_free(tod_scenario* scenario);

/* Runs in virtual time. A run that aborted still yields a handle and
 * returns TOD_ERR_ABORTED. */
TOD_API tod_status tod_scenario_run(const tod_scenario* scenario, tod_run** out);
TOD_API tod_status tod_run_aborted(const tod_run* run, int* aborted, const char** reason);
/* log.csv, metrics.json and streams.csv. */
TOD_API tod_status tod_run_write(const tod_run* run, const char* dir);
/* Names: actuation_latency_ms, swa_rmse, velocity_rmse, command_rate_hz,
 * g2g_ms:<camera>. `defined` is 0 when the metric has no value. */
TOD_API tod_status tod_run_metric(const tod_run* run, const char* name, double* value, int* defined);
TOD_API tod_status tod_run_log_csv(const tod_run* run, char** out);
TOD_API void tod_run_free(tod_run* run);

/* Summary of a log CSV as `key: value` lines. */
TOD_API tod_status tod_report(const char* csv_path, char** out);

/* Live nodes over UDP and TCP. Block until SIGINT/SIGTERM or the
 * configured duration. ui_port < 0 keeps the config value. */
TOD_API tod_status tod_live_vehicle(const char* config_path);
TOD_API tod_status tod_live_operator(const char* config_path, int ui_port);

/* Strings returned through char** are released with this. */
TOD_API void tod_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
