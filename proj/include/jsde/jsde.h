#ifndef JSDE_H
#define JSDE_H

/* C interface to the jump-SDE engine. Every call returns a jsde_status; on
 * failure jsde_last_error() describes the problem for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * jsde_string_free. Handles are released with their *_free function. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define JSDE_API __declspec(dllexport)
#else
#define JSDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jsde_status {
    JSDE_OK = 0,
    JSDE_INVALID_ARGUMENT = 1,
    JSDE_CONFIG_ERROR = 2,
    JSDE_DIVERGENCE = 3,
    JSDE_NUMERICAL_ERROR = 4,
    JSDE_IO_ERROR = 5,
    JSDE_INTERNAL_ERROR = 6
} jsde_status;

/* Point kinds in a solution path (bit set). */
enum { JSDE_POINT_GRID = 1, JSDE_POINT_BIG_JUMP = 2, JSDE_POINT_SMALL_JUMP = 4 };

typedef struct jsde_model jsde_model;
typedef struct jsde_path jsde_path;

JSDE_API const char* jsde_version(void);
JSDE_API const char* jsde_status_name(jsde_status status);
/* Message of the last failed call on this thread ("" when none). */
JSDE_API const char* jsde_last_error(void);
/* JSON pointer of the offending key after JSDE_CONFIG_ERROR ("" otherwise). */
JSDE_API const char* jsde_last_error_pointer(void);
JSDE_API void jsde_string_free(char* s);

/* Models: from a JSON config document or a built-in scenario name. */
JSDE_API jsde_status jsde_model_from_json(const char* json, jsde_model** out);
JSDE_API jsde_status jsde_model_from_scenario(const char* name, jsde_model** out);
/* Merges an "experiment" object (JSON) into the model's experiment settings. */
JSDE_API jsde_status jsde_model_set_experiment(jsde_model* model, const char* experiment_json);
/* Normalized config document with every default filled in. */
JSDE_API jsde_status jsde_model_to_json(const jsde_model* model, char** out);
JSDE_API void jsde_model_free(jsde_model* model);

/* Scenario catalog: JSON array of names, and the config document of one. */
JSDE_API jsde_status jsde_scenario_names(char** out);
JSDE_API jsde_status jsde_scenario_config(const char* name, char** out);

/* Condition report (JSON). gate_pass receives 1 when every hypothesis passes. */
JSDE_API jsde_status jsde_check(const jsde_model* model, unsigned threads, char** report, int* gate_pass);

/* One solution path on seeded noise. */
JSDE_API jsde_status jsde_simulate(const jsde_model* model, double x0, double horizon, double step, double eps,
                                   uint64_t seed, jsde_path** out);
JSDE_API size_t jsde_path_size(const jsde_path* path);
JSDE_API jsde_status jsde_path_point(const jsde_path* path, size_t index, double* time, double* value, int* kind);
/* 1 when the path was truncated by the overflow guard; the time goes to *time. */
JSDE_API int jsde_path_blew_up(const jsde_path* path, double* time);
/* CSV with columns time,x,is_jump,jump_kind. */
JSDE_API jsde_status jsde_path_csv(const jsde_path* path, char** out);
JSDE_API void jsde_path_free(jsde_path* path);

/* Noise realization as CSV rows kind,time,value. */
JSDE_API jsde_status jsde_noise_csv(const jsde_model* model, double horizon, double step, double eps, uint64_t seed,
                                    char** out);

/* Experiments use the model's experiment settings; reports are JSON. */
JSDE_API jsde_status jsde_couple(const jsde_model* model, unsigned threads, int gronwall, char** report);
JSDE_API jsde_status jsde_shrink(const jsde_model* model, unsigned threads, char** report);
JSDE_API jsde_status jsde_run_scenario(const jsde_model* model, unsigned threads, char** report);
/* Per-time CSV view of a couple report. */
JSDE_API jsde_status jsde_couple_csv(const char* couple_report, char** out);

/* psi table for a modulus spec such as "power:0.5" or "linear". A NULL grid
 * uses a per-level log grid around the support. */
JSDE_API jsde_status jsde_psi_table(const char* modulus_spec, int n_max, const double* grid, size_t grid_size,
                                    char** out);

/* Structural validation of an emitted report. */
JSDE_API jsde_status jsde_validate_report(const char* report);

#ifdef __cplusplus
}
#endif

#endif
