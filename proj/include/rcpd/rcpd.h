/* C interface to the robust CPD library.
 *
 * Objects are opaque handles created by rcpd_*_create / load / fit calls and
 * released with the matching rcpd_*_free. Every fallible call returns an
 * rcpd_status; on failure rcpd_last_error() describes the problem (the message
 * is thread-local and valid until the next failing call on that thread).
 *
 * Dense data crosses the boundary as double arrays: tensors in the library
 * storage order (element (i,j,k) at i + I*(j + J*k)) and matrices in
 * column-major order.
 */
#ifndef RCPD_H
#define RCPD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RCPD_BUILDING_LIBRARY)
#    define RCPD_API __declspec(dllexport)
#  else
#    define RCPD_API __declspec(dllimport)
#  endif
#else
#  define RCPD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rcpd_status {
  RCPD_OK = 0,
  RCPD_ERR_INVALID_ARGUMENT = 1,
  RCPD_ERR_DIMENSION_MISMATCH = 2,
  RCPD_ERR_SINGULAR = 3,
  RCPD_ERR_NON_FINITE = 4,
  RCPD_ERR_IO = 5,
  RCPD_ERR_PARSE = 6,
  RCPD_ERR_INTERNAL = 99
} rcpd_status;

typedef struct rcpd_tensor rcpd_tensor;
typedef struct rcpd_matrix rcpd_matrix;
typedef struct rcpd_factors rcpd_factors;
typedef struct rcpd_config rcpd_config;
typedef struct rcpd_fit_result rcpd_fit_result;

typedef struct rcpd_synthetic_spec {
  size_t I, J, K;
  size_t rank;
  size_t outlier_count;
  double sor_db;
  uint64_t seed;
} rcpd_synthetic_spec;

RCPD_API const char* rcpd_version(void);
RCPD_API const char* rcpd_last_error(void);
RCPD_API const char* rcpd_status_string(rcpd_status status);
/* Frees strings returned through char** out-parameters. */
RCPD_API void rcpd_string_free(char* s);

/* Tensors. data may be NULL for a zero tensor. */
RCPD_API rcpd_status rcpd_tensor_create(size_t I, size_t J, size_t K, const double* data, rcpd_tensor** out);
RCPD_API void rcpd_tensor_free(rcpd_tensor* t);
RCPD_API rcpd_status rcpd_tensor_dims(const rcpd_tensor* t, size_t dims[3]);
RCPD_API rcpd_status rcpd_tensor_copy_data(const rcpd_tensor* t, double* buf, size_t len);
/* ".csv" paths use the CSV interchange format, anything else the binary container. */
RCPD_API rcpd_status rcpd_tensor_load(const char* path, rcpd_tensor** out);
RCPD_API rcpd_status rcpd_tensor_save(const rcpd_tensor* t, const char* path);

/* Matrices. data may be NULL for a zero matrix. */
RCPD_API rcpd_status rcpd_matrix_create(size_t rows, size_t cols, const double* data, rcpd_matrix** out);
RCPD_API void rcpd_matrix_free(rcpd_matrix* m);
RCPD_API rcpd_status rcpd_matrix_dims(const rcpd_matrix* m, size_t* rows, size_t* cols);
RCPD_API rcpd_status rcpd_matrix_copy_data(const rcpd_matrix* m, double* buf, size_t len);
RCPD_API rcpd_status rcpd_matrix_load(const char* path, rcpd_matrix** out);
RCPD_API rcpd_status rcpd_matrix_save(const rcpd_matrix* m, const char* path);

/* Factor triples (A: I x R, B: J x R, C: K x R). which is 'A', 'B' or 'C'. */
RCPD_API rcpd_status rcpd_factors_create(const rcpd_matrix* A, const rcpd_matrix* B, const rcpd_matrix* C,
                                         rcpd_factors** out);
RCPD_API void rcpd_factors_free(rcpd_factors* f);
RCPD_API rcpd_status rcpd_factors_rank(const rcpd_factors* f, size_t* rank);
RCPD_API rcpd_status rcpd_factors_get(const rcpd_factors* f, char which, rcpd_matrix** out);
RCPD_API rcpd_status rcpd_factors_reconstruct(const rcpd_factors* f, rcpd_tensor** out);

/* Fit configuration from JSON text (NULL or "" for defaults). */
RCPD_API rcpd_status rcpd_config_parse(const char* json, rcpd_config** out);
RCPD_API void rcpd_config_free(rcpd_config* cfg);
/* Replaces the seed of a random or TALS initialization. */
RCPD_API rcpd_status rcpd_config_set_seed(rcpd_config* cfg, uint64_t seed);

/* Runs the configured algorithm. init may be NULL to use the configured
 * initialization; otherwise fitting starts from the given factors. */
RCPD_API rcpd_status rcpd_fit(const rcpd_tensor* t, size_t rank, const rcpd_config* cfg,
                              const rcpd_factors* init, rcpd_fit_result** out);
RCPD_API void rcpd_fit_result_free(rcpd_fit_result* r);
RCPD_API rcpd_status rcpd_fit_result_factors(const rcpd_fit_result* r, rcpd_factors** out);
RCPD_API rcpd_status rcpd_fit_result_num_weights(const rcpd_fit_result* r, size_t* n);
RCPD_API rcpd_status rcpd_fit_result_weights(const rcpd_fit_result* r, double* buf, size_t len);
RCPD_API rcpd_status rcpd_fit_result_trace_length(const rcpd_fit_result* r, size_t* n);
RCPD_API rcpd_status rcpd_fit_result_cost_trace(const rcpd_fit_result* r, double* buf, size_t len);
RCPD_API rcpd_status rcpd_fit_result_iterations(const rcpd_fit_result* r, size_t* iterations);
RCPD_API rcpd_status rcpd_fit_result_converged(const rcpd_fit_result* r, int* converged);
RCPD_API rcpd_status rcpd_fit_result_final_cost(const rcpd_fit_result* r, double* cost);
/* JSON report {algorithm, iterations, converged, cost_trace, weights} plus
 * mse_db_B / mse_db_C when truth is non-NULL. */
RCPD_API rcpd_status rcpd_fit_result_to_json(const rcpd_fit_result* r, const rcpd_factors* truth, char** json);

/* Permutation/sign aligned factor MSE (linear) and its dB value (floored at -300). */
RCPD_API rcpd_status rcpd_align_mse(const rcpd_matrix* truth, const rcpd_matrix* estimate, double* mse);
RCPD_API double rcpd_mse_to_db(double mse);

/* Synthetic data. outliers may be NULL; otherwise it must hold spec->outlier_count entries. */
RCPD_API rcpd_status rcpd_generate(const rcpd_synthetic_spec* spec, rcpd_tensor** tensor, rcpd_factors** truth,
                                   size_t* outliers);
RCPD_API rcpd_status rcpd_identifiability_margin(const rcpd_synthetic_spec* spec, long* c, int* satisfied);

/* Runs a sweep described by JSON; returns the full JSON report and the CSV table. */
RCPD_API rcpd_status rcpd_run_sweep(const char* config_json, char** report_json, char** table_csv);

#ifdef __cplusplus
}
#endif

#endif /* RCPD_H */
