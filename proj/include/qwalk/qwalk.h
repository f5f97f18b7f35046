#ifndef QWALK_H
#define QWALK_H

/* C interface to the qwalk shared library. Objects are opaque handles owned
 * by the caller and released with the matching *_free function. Every
 * function returning qw_status leaves a description of the last failure in
 * qw_last_error() (per thread). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define QW_API __attribute__((visibility("default")))
#else
#define QW_API
#endif

typedef enum qw_status {
    QW_OK = 0,
    QW_INVALID_ARGUMENT = 1,
    QW_CONFIG_ERROR = 2,
    QW_NON_CONVERGENCE = 3,
    QW_REGIME_VIOLATION = 4,
    QW_IO_ERROR = 5,
    QW_INTERNAL_ERROR = 6
} qw_status;

typedef struct qw_state qw_state;
typedef struct qw_config qw_config;

QW_API const char* qw_version(void);
/* Stable lowercase name, e.g. "config_error". */
QW_API const char* qw_status_name(qw_status status);
/* Message of the last failed call on this thread; "" after a success. */
QW_API const char* qw_last_error(void);

/* States. component is 1 or 2. */
QW_API qw_status qw_state_delta(int component, int64_t site, double re, double im, qw_state** out);
QW_API qw_status qw_state_from_json(const char* json, qw_state** out);
/* *out is a NUL-terminated string released with qw_string_free. */
QW_API qw_status qw_state_to_json(const qw_state* state, char** out);
/* kind: "l1", "l2", "l5", "linf", "weak_l4", ... */
QW_API qw_status qw_state_norm(const qw_state* state, const char* kind, double* out);
/* Stored window [lo, hi]; hi < lo for the zero state. */
QW_API qw_status qw_state_support(const qw_state* state, int64_t* lo, int64_t* hi);
QW_API void qw_state_free(qw_state* state);
QW_API void qw_string_free(char* s);

/* Run configs (TOML). Relative paths inside a parsed text resolve against
 * base_dir (may be NULL for the working directory). */
QW_API qw_status qw_config_load(const char* path, qw_config** out);
QW_API qw_status qw_config_parse(const char* text, const char* base_dir, qw_config** out);
/* Overrides the seed of random initial states. */
QW_API qw_status qw_config_set_seed(qw_config* config, uint64_t seed);
/* The configured initial state. */
QW_API qw_status qw_config_initial_state(const qw_config* config, qw_state** out);
QW_API void qw_config_free(qw_config* config);

/* u(horizon) under the configured coin. */
QW_API qw_status qw_walk(const qw_config* config, const qw_state* initial, int64_t horizon, qw_state** out);

/* command: "walk", "decay", "scatter", "invscat" or "spectrum". Writes the
 * run bundle into out_dir (created if missing). */
QW_API qw_status qw_run(const qw_config* config, const char* command, const char* out_dir, unsigned threads);

#ifdef __cplusplus
}
#endif

#endif
