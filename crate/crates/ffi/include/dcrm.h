#ifndef DCRM_H
#define DCRM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum DcrmStatus {
  DCRM_STATUS_OK = 0,
  DCRM_STATUS_NULL_POINTER = 1,
  DCRM_STATUS_INVALID_ARGUMENT = 2,
  DCRM_STATUS_DOMAIN = 3,
  DCRM_STATUS_CONFIG = 4,
  DCRM_STATUS_IO = 5,
  DCRM_STATUS_UNSUPPORTED = 6,
  DCRM_STATUS_BUFFER_TOO_SMALL = 7,
  DCRM_STATUS_PANIC = 99,
} DcrmStatus;

/**
 * Opaque scenario handle.
 */
typedef struct DcrmScenarioHandle DcrmScenarioHandle;

/**
 * Opaque simulation result handle.
 */
typedef struct DcrmSimulationHandle DcrmSimulationHandle;

typedef struct DcrmSummary {
  uint64_t n_paths;
  double mean;
  double mean_std_error;
  double variance;
  double variance_std_error;
} DcrmSummary;

typedef struct DcrmEstimate {
  double value;
  double std_error;
} DcrmEstimate;

/**
 * `per_expected_mile` is NaN when no mileage is expected.
 */
typedef struct DcrmQuote {
  double net_premium;
  double std_error;
  double expected_mileage;
  double per_expected_mile;
  uint64_t n_outer_paths;
} DcrmQuote;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message (NUL-terminated, truncated to
 * fit) into `buf` and returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t dcrm_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dcrm_version(void);

/**
 * Parses a TOML scenario. Relative trip-log paths resolve against `base_dir`
 * (the working directory when null).
 *
 * # Safety
 * `text` and `base_dir` must be null or NUL-terminated strings; `out` must be
 * null or valid for writes.
 */
enum DcrmStatus dcrm_scenario_from_toml(const char *text,
                                        const char *base_dir,
                                        struct DcrmScenarioHandle **out);

/**
 * Loads a TOML scenario file.
 *
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or valid
 * for writes.
 */
enum DcrmStatus dcrm_scenario_load(const char *path, struct DcrmScenarioHandle **out);

/**
 * # Safety
 * `handle` must be null or come from `dcrm_scenario_from_toml`/`dcrm_scenario_load`
 * and not have been freed.
 */
void dcrm_scenario_free(struct DcrmScenarioHandle *handle);

/**
 * `μ1 λ (1 - e^{-δt}) / δ`, with the `δ = 0` limit `μ1 λ t`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum DcrmStatus dcrm_analytic_mean(double mu1, double lambda, double delta, double t, double *out);

/**
 * `μ2 λ (1 - e^{-2δt}) / (2δ)`, with the `δ = 0` limit `μ2 λ t`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum DcrmStatus dcrm_analytic_variance(double mu2,
                                       double lambda,
                                       double delta,
                                       double t,
                                       double *out);

/**
 * Closed-form m.g.f. for exponential claims with mean `beta`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum DcrmStatus dcrm_mgf_exponential_closed(double beta,
                                            double lambda,
                                            double delta,
                                            double t,
                                            double u,
                                            double *out);

/**
 * Quadrature m.g.f. of `Z_t` for a non-Cox scenario.
 *
 * # Safety
 * `scenario` must be a live handle or null; `out` must be null or valid for writes.
 */
enum DcrmStatus dcrm_scenario_mgf(const struct DcrmScenarioHandle *scenario, double u, double *out);

/**
 * Simulates `n_paths` realizations of `Z_t`; `full_trace` is taken from the scenario.
 *
 * # Safety
 * `scenario` must be a live handle or null; `out` must be null or valid for writes.
 */
enum DcrmStatus dcrm_simulate(const struct DcrmScenarioHandle *scenario,
                              uint64_t n_paths,
                              uint64_t seed,
                              struct DcrmSimulationHandle **out);

/**
 * # Safety
 * `handle` must be null or a live simulation handle.
 */
void dcrm_simulation_free(struct DcrmSimulationHandle *handle);

/**
 * Number of paths, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live simulation handle.
 */
size_t dcrm_simulation_len(const struct DcrmSimulationHandle *handle);

/**
 * Copies the per-path `Z_t` values into `buf`, which must hold at least
 * `dcrm_simulation_len` values.
 *
 * # Safety
 * `handle` must be null or a live simulation handle; `buf` must be null or
 * valid for `len` writes.
 */
enum DcrmStatus dcrm_simulation_copy_z(const struct DcrmSimulationHandle *handle,
                                       double *buf,
                                       size_t len);

/**
 * Copies the per-path claim counts into `buf`.
 *
 * # Safety
 * As [`dcrm_simulation_copy_z`].
 */
enum DcrmStatus dcrm_simulation_copy_counts(const struct DcrmSimulationHandle *handle,
                                            uint32_t *buf,
                                            size_t len);

/**
 * # Safety
 * `handle` must be null or a live simulation handle; `out` must be null or
 * valid for writes.
 */
enum DcrmStatus dcrm_simulation_summary(const struct DcrmSimulationHandle *handle,
                                        struct DcrmSummary *out);

/**
 * Sample m.g.f. `mean(exp(u Z))` over the simulated paths.
 *
 * # Safety
 * `handle` must be null or a live simulation handle; `out` must be null or
 * valid for writes.
 */
enum DcrmStatus dcrm_simulation_mgf(const struct DcrmSimulationHandle *handle,
                                    double u,
                                    struct DcrmEstimate *out);

/**
 * PAYD net premium over `n_outer` mileage paths (one for deterministic mileage).
 *
 * # Safety
 * `scenario` must be null or a live handle; `out` must be null or valid for writes.
 */
enum DcrmStatus dcrm_price(const struct DcrmScenarioHandle *scenario,
                           uint64_t n_outer,
                           uint64_t seed,
                           struct DcrmQuote *out);

/**
 * Cox-process m.g.f. of `Z_t` by outer Monte Carlo over mileage paths.
 *
 * # Safety
 * `scenario` must be null or a live handle; `out` must be null or valid for writes.
 */
enum DcrmStatus dcrm_mgf_cox(const struct DcrmScenarioHandle *scenario,
                             double u,
                             uint64_t n_outer,
                             uint64_t seed,
                             struct DcrmEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DCRM_H */
