/* qfstab — quantized and ternary feedback stabilization toolkit.
 *
 * C API of the shared library. All functions return a qfs_status; on any
 * failure qfs_last_error() carries a human-readable message (thread-local).
 * Objects are opaque handles owned by the caller through the matching
 * *_free function.
 */
#ifndef QFSTAB_H
#define QFSTAB_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qfs_status {
    QFS_OK = 0,
    QFS_ERROR_INVALID_ARGUMENT = 1,
    QFS_ERROR_CONFIG = 2,
    QFS_ERROR_SYNTHESIS = 3,
    QFS_ERROR_DOMAIN = 4,
    QFS_ERROR_RANGE = 5,
    QFS_ERROR_MONITOR = 6, /* a runtime monitor reported a violation */
    QFS_ERROR_IO = 7,
    QFS_ERROR_INTERNAL = 8
} qfs_status;

typedef struct qfs_experiment qfs_experiment; /* parsed experiment configuration */
typedef struct qfs_synthesis qfs_synthesis;   /* synthesized controller constants */

/* Aggregate statistics of one run or a sweep. */
typedef struct qfs_sweep_stats {
    long runs;
    long monitor_failures;
    double min_dwell;
    double max_rav;
    double max_entry_time;
    long never_entered;
    long switching_ceased;
    long hysteresis_jumps;
} qfs_sweep_stats;

const char* qfs_version(void);
const char* qfs_status_name(qfs_status s);
/* Message of the most recent failure on this thread ("" if none). */
const char* qfs_last_error(void);

/* --- experiment configuration ------------------------------------------- */
qfs_status qfs_experiment_load(const char* path, qfs_experiment** out);
qfs_status qfs_experiment_parse(const char* text, qfs_experiment** out);
void qfs_experiment_free(qfs_experiment* e);

qfs_status qfs_experiment_set_seed(qfs_experiment* e, uint64_t seed);
qfs_status qfs_experiment_set_horizon(qfs_experiment* e, double horizon);
qfs_status qfs_experiment_set_output_dir(qfs_experiment* e, const char* dir);
/* Canonical round-trippable text; caller copies it before the next call. */
qfs_status qfs_experiment_serialize(const qfs_experiment* e, const char** out_text);

/* --- synthesis ------------------------------------------------------------ */
qfs_status qfs_synthesize(const qfs_experiment* e, qfs_synthesis** out);
qfs_status qfs_synthesis_save(const qfs_synthesis* s, const char* path);
qfs_status qfs_synthesis_load(const char* path, qfs_synthesis** out);
void qfs_synthesis_free(qfs_synthesis* s);
/* Scalar fields by name: delta, eta, w_bar, b_bar, zeta_bar, q_bar, k_star,
 * k0, j_star, kbar, j, u0, dt_min, rate_bound_quantized, rate_bound_ternary,
 * kbar_ternary, sigma, c, d, b0. */
qfs_status qfs_synthesis_value(const qfs_synthesis* s, const char* key, double* out);

/* --- commands (write files under the experiment's output directory) ------- */
/* synthesis.txt + derivation.txt */
qfs_status qfs_cmd_synthesize(const qfs_experiment* e);
/* One closed-loop run; QFS_ERROR_MONITOR if any runtime monitor failed. */
qfs_status qfs_cmd_run(const qfs_experiment* e, const char* synthesis_path, int ic_index,
                       int mu_index, qfs_sweep_stats* stats_opt);
/* Full initial-condition x parameter sweep plus summary.txt. */
qfs_status qfs_cmd_sweep(const qfs_experiment* e, const char* synthesis_path,
                         qfs_sweep_stats* stats_opt);
/* Module property checks; report written to report_path (NULL: stdout).
 * QFS_ERROR_MONITOR if any check failed. */
qfs_status qfs_selftest(const char* report_path);

#ifdef __cplusplus
}
#endif

#endif /* QFSTAB_H */
