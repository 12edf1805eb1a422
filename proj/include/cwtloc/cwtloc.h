/* C interface to the cwtloc library. All functions return a status code;
 * CWTLOC_OK on success, a negative CWTLOC_ERROR_* value otherwise. */
#ifndef CWTLOC_H_
#define CWTLOC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CWTLOC_API __declspec(dllexport)
#else
#define CWTLOC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum cwtloc_status {
  CWTLOC_OK = 0,
  CWTLOC_ERROR_INVALID_ARGUMENT = -1,
  CWTLOC_ERROR_GRID_MISMATCH = -2,
  CWTLOC_ERROR_ZERO_INPUT = -3,
  CWTLOC_ERROR_DOMAIN = -4,
  CWTLOC_ERROR_CONSTRAINT = -5,
  CWTLOC_ERROR_DEGENERATE = -6,
  CWTLOC_ERROR_TRUNCATION = -7,
  CWTLOC_ERROR_CONFIG = -8,
  CWTLOC_ERROR_IO = -9,
  CWTLOC_ERROR_NULL_POINTER = -10,
  CWTLOC_ERROR_BUFFER_TOO_SMALL = -11,
  CWTLOC_ERROR_UNKNOWN = -99
};

typedef struct cwtloc_grid_struct* cwtloc_grid_t;
typedef struct cwtloc_window_struct* cwtloc_window_t;

typedef struct {
  double v_scale_S;
  double v_scale_W;
  double v_time_S;
  double v_time_W_factor;
  double total;
  double res_scale;
  double res_time;
} cwtloc_uncertainty_report;

typedef struct {
  int max_iters;
  double step0;
  double backtrack_factor;
  double grad_tol;
  double constraint_tol;
  int metric; /* 0 = sobolev, 1 = w */
} cwtloc_descent_options;

typedef struct {
  double initial_L;
  double final_L;
  int iters;
  double lambda_final;
  double final_grad_norm;
  int termination; /* 0 grad_tol, 1 max_iters, 2 step_underflow */
} cwtloc_descent_summary;

typedef struct {
  double a_max;
  double b_max;
  int n_a;
  int n_b;
} cwtloc_phase_grid;

typedef struct {
  double mass;
  double v_A;
  double v_B;
  double pullback_A;
  double pullback_B;
  double rel_gap_A;
  double rel_gap_B;
  double rel_gap_total;
  double truncation_allowance;
} cwtloc_consistency_report;

CWTLOC_API const char* cwtloc_error_description(int status);
/* Message of the last failing call on this thread, "" if none. */
CWTLOC_API const char* cwtloc_last_error_message(void);
/* Process exit code the CLI uses for a status. */
CWTLOC_API int cwtloc_exit_code(int status);

CWTLOC_API int cwtloc_grid_create(cwtloc_grid_t* grid, double omega_max, size_t n);
CWTLOC_API int cwtloc_grid_destroy(cwtloc_grid_t grid);
CWTLOC_API int cwtloc_grid_size(cwtloc_grid_t grid, size_t* n);
CWTLOC_API int cwtloc_grid_samples(cwtloc_grid_t grid, double* out, size_t len);

CWTLOC_API int cwtloc_window_create(cwtloc_window_t* win, cwtloc_grid_t grid, const double* re, const double* im,
                                    size_t len);
CWTLOC_API int cwtloc_window_truncated_gaussian(cwtloc_window_t* win, cwtloc_grid_t grid, double m, double s);
CWTLOC_API int cwtloc_window_read_csv(cwtloc_window_t* win, const char* path);
CWTLOC_API int cwtloc_window_write_csv(cwtloc_window_t win, const char* path);
CWTLOC_API int cwtloc_window_destroy(cwtloc_window_t win);
CWTLOC_API int cwtloc_window_size(cwtloc_window_t win, size_t* n);
CWTLOC_API int cwtloc_window_values(cwtloc_window_t win, double* re, double* im, size_t len);

CWTLOC_API int cwtloc_uncertainty(cwtloc_window_t win, cwtloc_uncertainty_report* out);
CWTLOC_API int cwtloc_enforce_constraints(cwtloc_window_t win, double tol, cwtloc_window_t* out);

CWTLOC_API int cwtloc_descent_options_default(cwtloc_descent_options* opts);
/* opts may be NULL for defaults; out receives the final window. */
CWTLOC_API int cwtloc_descent(cwtloc_window_t start, const cwtloc_descent_options* opts, cwtloc_window_t* out,
                              cwtloc_descent_summary* summary);

CWTLOC_API int cwtloc_phase_grid_default(cwtloc_phase_grid* ps);
CWTLOC_API int cwtloc_pullback_consistency(cwtloc_window_t win, const cwtloc_phase_grid* ps, int threads,
                                           cwtloc_consistency_report* out);

/* command: init-scan | optimize | verify | all. config_path may be NULL for
 * defaults; out_dir, seed and threads override the config when non-NULL / > 0. */
CWTLOC_API int cwtloc_run(const char* command, const char* config_path, const char* out_dir, const uint64_t* seed,
                          int threads);

#ifdef __cplusplus
}
#endif

#endif
