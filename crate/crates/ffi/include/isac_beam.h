#ifndef ISAC_BEAM_H
#define ISAC_BEAM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IsacStatus {
  ISAC_STATUS_OK = 0,
  ISAC_STATUS_NULL_POINTER = 1,
  ISAC_STATUS_INVALID_ARGUMENT = 2,
  ISAC_STATUS_INDEX_OUT_OF_RANGE = 3,
  ISAC_STATUS_DIMENSION_MISMATCH = 4,
  ISAC_STATUS_NUMERICAL = 5,
  ISAC_STATUS_IO = 6,
  ISAC_STATUS_PARSE = 7,
  ISAC_STATUS_BUFFER_TOO_SMALL = 8,
  ISAC_STATUS_PANIC = 9,
} IsacStatus;

/*
 System parameters.
 */
typedef struct IsacConfig IsacConfig;

/*
 One channel realization.
 */
typedef struct IsacScene IsacScene;

/*
 Solver output.
 */
typedef struct IsacSolution IsacSolution;

/*
 Options of the first-order solver.
 */
typedef struct IsacAlg1Options {
  double mu;
  uint32_t outer_max;
  uint32_t inner_w;
  double tol;
} IsacAlg1Options;

/*
 Options of the fractional-programming baseline.
 */
typedef struct IsacFpOptions {
  uint32_t outer_max;
  double tol;
  uint32_t epigraph_iters;
  double step_scale;
} IsacFpOptions;

typedef struct IsacSummary {
  uint32_t n_tx;
  uint32_t n_rx;
  uint32_t n_users;
  uint32_t n_targets;
  double min_sinr;
  double min_scnr;
  double objective_p1;
  double objective_p2;
  uint32_t iterations;
  bool converged;
  double seconds;
} IsacSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the last error message of this thread into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length excluding the NUL, or
 0 when there is no error.
 */
size_t isac_last_error(char *buf, size_t len);

/*
 Library version as a static NUL-terminated string.
 */
const char *isac_version(void);

/*
 Default system configuration. Never null.
 */
struct IsacConfig *isac_config_new(void);

/*
 Parses a TOML configuration; missing keys take defaults.
 */
enum IsacStatus isac_config_from_toml(const char *text, struct IsacConfig **out);

/*
 Loads a TOML configuration file.
 */
enum IsacStatus isac_config_load(const char *path, struct IsacConfig **out);

void isac_config_free(struct IsacConfig *cfg);

enum IsacStatus isac_config_set_seed(struct IsacConfig *cfg, uint64_t seed);

enum IsacStatus isac_config_set_delta(struct IsacConfig *cfg, double delta);

enum IsacStatus isac_config_set_users(struct IsacConfig *cfg, uint32_t n_users);

/*
 Sets the transmit power so that a user at the nominal distance sees
 `snr_db` over the user noise power.
 */
enum IsacStatus isac_config_set_snr_db(struct IsacConfig *cfg, double snr_db);

/*
 Writes the configuration as TOML into `buf` (NUL-terminated). `needed`
 receives the length including the NUL.
 */
enum IsacStatus isac_config_to_toml(const struct IsacConfig *cfg,
                                    char *buf,
                                    size_t len,
                                    size_t *needed);

/*
 Draws the scene for the configuration's seed.
 */
enum IsacStatus isac_scene_generate(const struct IsacConfig *cfg, struct IsacScene **out);

void isac_scene_free(struct IsacScene *scene);

/*
 Copies the user channel matrix (`n_tx x n_users`) into `buf`, which must
 hold `2 * n_tx * n_users` doubles.
 */
enum IsacStatus isac_scene_channels(const struct IsacScene *scene, double *buf, size_t len);

struct IsacAlg1Options isac_alg1_options_default(void);

struct IsacFpOptions isac_fp_options_default(void);

/*
 Runs the first-order solver. `opts` may be null for defaults. The sensing
 weight and power budget come from `cfg`.
 */
enum IsacStatus isac_solve_alg1(const struct IsacScene *scene,
                                const struct IsacConfig *cfg,
                                const struct IsacAlg1Options *opts,
                                struct IsacSolution **out);

/*
 Runs the fractional-programming baseline. `opts` may be null for defaults.
 */
enum IsacStatus isac_solve_fp(const struct IsacScene *scene,
                              const struct IsacConfig *cfg,
                              const struct IsacFpOptions *opts,
                              struct IsacSolution **out);

void isac_solution_free(struct IsacSolution *sol);

enum IsacStatus isac_solution_summary(const struct IsacSolution *sol, struct IsacSummary *out);

/*
 Precoder `W` (`n_tx x n_users`); `len` counts doubles, at least `2 * n_tx * n_users`.
 */
enum IsacStatus isac_solution_precoder(const struct IsacSolution *sol, double *buf, size_t len);

/*
 Radar combiner `F` (`n_rx x n_targets`); `len` at least `2 * n_rx * n_targets`.
 */
enum IsacStatus isac_solution_combiner(const struct IsacSolution *sol, double *buf, size_t len);

/*
 Linear per-user SINR; `len` at least `n_users`.
 */
enum IsacStatus isac_solution_sinr(const struct IsacSolution *sol, double *buf, size_t len);

/*
 Linear per-target SCNR; `len` at least `n_targets`.
 */
enum IsacStatus isac_solution_scnr(const struct IsacSolution *sol, double *buf, size_t len);

/*
 Per-iteration linear objective of the trace; `len` at least iterations + 1.
 */
enum IsacStatus isac_solution_objective_trace(const struct IsacSolution *sol,
                                              double *buf,
                                              size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISAC_BEAM_H */
