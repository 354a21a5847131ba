/*
 * C interface to the ReLU-based maximum score (RMS) toolkit.
 *
 * Objects are opaque handles created by rms_*_create/generate/fit functions
 * and released with the matching rms_*_free. Every fallible call returns an
 * rms_status; on failure rms_last_error() describes the problem (the message
 * is thread-local and valid until the next failing call on that thread).
 * Configurations are passed as JSON text.
 */
#ifndef RMS_RMS_H
#define RMS_RMS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RMS_API __declspec(dllexport)
#else
#define RMS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rms_status {
    RMS_OK = 0,
    RMS_ERR_INVALID_ARGUMENT = 1,
    RMS_ERR_CONFIG = 2,
    RMS_ERR_EXPERIMENT = 3,
    RMS_ERR_NUMERICAL = 4,
    RMS_ERR_IO = 5,
    RMS_ERR_INTERNAL = 9
} rms_status;

typedef struct rms_dataset rms_dataset;
typedef struct rms_regressor rms_regressor;
typedef struct rms_report rms_report;

RMS_API const char* rms_version(void);
RMS_API const char* rms_last_error(void);
/* Frees strings returned through char** out-parameters. */
RMS_API void rms_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* dgp_json: {"design","n","theta0","d","covariate_low","covariate_high","seed"} */
RMS_API rms_status rms_dataset_generate(const char* dgp_json, rms_dataset** out);
/* CSV with header x_1_1..x_J_d,y (y in {0,1}). */
RMS_API rms_status rms_dataset_read_csv(const char* path, rms_dataset** out);
RMS_API rms_status rms_dataset_write_csv(const rms_dataset* data, const char* path);
RMS_API rms_status rms_dataset_shape(const rms_dataset* data, size_t* n, size_t* J, size_t* d);
/* Copies row i (J*d values) and its centered response. */
RMS_API rms_status rms_dataset_row(const rms_dataset* data, size_t i, double* x, size_t len,
                                   double* y_centered);
RMS_API void rms_dataset_free(rms_dataset* data);

/* ---- first stage ------------------------------------------------------- */

/* spec_json: {"type":"kernel"|"series"|"mlp"|"kernel_ridge", <type>: {...}} */
RMS_API rms_status rms_regressor_fit(const rms_dataset* data, const char* spec_json, rms_regressor** out);
RMS_API rms_status rms_regressor_predict(const rms_regressor* model, const double* x, size_t len, double* out);
/* JSON dump; dataset_ref names the training data file for kernel models. */
RMS_API rms_status rms_regressor_dump(const rms_regressor* model, const char* dataset_ref, char** out_json);
RMS_API void rms_regressor_free(rms_regressor* model);

/* Closed-form h0 for the simulation designs ("single_index" / "two_index"). */
RMS_API rms_status rms_true_h0(const char* design, const double* x, size_t len, const double* theta0, size_t d,
                               double* out);

/* ---- criterion --------------------------------------------------------- */

/* model == NULL selects the oracle h0 of `design` with theta0 (both required then). */
RMS_API rms_status rms_criterion(const rms_dataset* data, const rms_regressor* model, const char* design,
                                 const double* theta0, const double* theta, size_t d, double* q,
                                 double* q_plus, double* q_minus);
RMS_API rms_status rms_criterion_subgradient(const rms_dataset* data, const rms_regressor* model,
                                             const char* design, const double* theta0, const double* theta,
                                             size_t d, double* grad);

/* ---- estimation -------------------------------------------------------- */

/* estimator_json as in the experiment config's "estimator" block. theta0 is
 * only read by the oracle estimator. Writes d values into theta_out. */
RMS_API rms_status rms_estimate(const rms_dataset* data, const char* estimator_json, uint64_t seed,
                                const double* theta0, double* theta_out, size_t d, double* q_out);

/* ---- Monte Carlo ------------------------------------------------------- */

/* threads == 0 uses the hardware concurrency; RMS_THREADS caps either choice. */
RMS_API rms_status rms_simulate(const char* config_json, size_t threads, rms_report** out);
/* format: "md", "csv" or "json". */
RMS_API rms_status rms_report_render(const rms_report* report, const char* format, char** out);
/* Writes <dir>/<label>.<ext>; dir NULL uses the config's output dir. */
RMS_API rms_status rms_report_write(const rms_report* report, const char* dir, const char* format);
RMS_API rms_status rms_report_metric(const rms_report* report, size_t cell, const char* metric, double* out);
RMS_API rms_status rms_report_cells(const rms_report* report, size_t* cells);
RMS_API void rms_report_free(rms_report* report);

/* ---- surface diagnostics ----------------------------------------------- */

/* config_json: {"dgp":{...},"quadrature":{"nodes":..},"kernel":{...}}; returns
 * V, Omega, their eigenvalues and ||V theta0||, ||Omega theta0|| as JSON. */
RMS_API rms_status rms_diagnose_v(const char* config_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* RMS_RMS_H */
