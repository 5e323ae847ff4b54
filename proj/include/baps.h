/* SPDX-License-Identifier: Apache-2.0 */
#ifndef BAPS_H
#define BAPS_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Carrier-phase-recovery simulation library, C interface.
 *
 * All functions returning int use the BAPS_* codes below; on any failure a
 * human-readable message is available from baps_last_error() (thread-local).
 * Objects are opaque; every *_new/_run/_sweep result must be released with
 * the matching *_free.
 */

enum {
    BAPS_OK = 0,
    BAPS_EINVAL = 1,  /* bad arguments (null pointers, bad row index) */
    BAPS_ECONFIG = 2, /* invalid configuration or grid */
    BAPS_ERUNTIME = 3,
    BAPS_EIO = 4
};

typedef struct baps_config baps_config;
typedef struct baps_results baps_results;

const char* baps_version(void);
const char* baps_last_error(void);

/* --- configuration ------------------------------------------------- */

baps_config* baps_config_new(void);
void baps_config_free(baps_config* cfg);

/* Key/value interface; keys match the config file schema. */
int baps_config_set(baps_config* cfg, const char* key, const char* value);
int baps_config_get(const baps_config* cfg, const char* key, char* buf, size_t buflen);
int baps_config_load_file(baps_config* cfg, const char* path);
int baps_config_save_file(const baps_config* cfg, const char* path);

/* --- execution ----------------------------------------------------- */

/* Runs repetitions x pilot-window-list points for the configuration.
 * with_timing != 0 records real wall times (otherwise wall_s is 0 so
 * outputs are byte-reproducible). */
int baps_run(const baps_config* cfg, int with_timing, baps_results** out);

/* Cartesian sweep. grid_text uses "key = v1, v2, ..." lines (';' also
 * separates entries); axes: algorithm, lambda, snr_db, half_window,
 * pilot_window. workers <= 0 consults BAPS_WORKERS then runs serial. */
int baps_sweep(const baps_config* cfg, const char* grid_text, int workers, int with_timing,
               baps_results** out);

/* --- results ------------------------------------------------------- */

int baps_results_count(const baps_results* res, size_t* out);

/* Numeric access by CSV column name ("mi_bits", "ser", ...). */
int baps_results_value(const baps_results* res, size_t row, const char* column, double* out);

/* The "algorithm" / "version" string columns. */
int baps_results_string(const baps_results* res, size_t row, const char* column, char* buf,
                        size_t buflen);

int baps_results_write_csv(const baps_results* res, const char* path);
int baps_results_write_jsonl(const baps_results* res, const char* path);

/* Best-L reduction: keeps, per configuration group, the rows of the
 * pilot_window with the highest mean MI. */
int baps_results_best_pilot_window(const baps_results* res, baps_results** out);

void baps_results_free(baps_results* res);

#ifdef __cplusplus
}
#endif

#endif /* BAPS_H */
