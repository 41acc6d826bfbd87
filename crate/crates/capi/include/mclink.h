#ifndef MCLINK_H
#define MCLINK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every API function.
 */
typedef enum McLinkStatus {
  McLinkStatus_Ok = 0,
  McLinkStatus_NullArgument = 1,
  McLinkStatus_ConfigError = 2,
  McLinkStatus_NumericalError = 3,
  McLinkStatus_IoError = 4,
  McLinkStatus_InvalidUtf8 = 5,
  McLinkStatus_Panic = 6,
} McLinkStatus;

/**
 * Experiment sweep axes.
 */
typedef enum McLinkSweepAxis {
  McLinkSweepAxis_Snr = 0,
  McLinkSweepAxis_Antennas = 1,
} McLinkSweepAxis;

/**
 * Waveform selector for the direct complexity query.
 */
typedef enum McLinkWaveform {
  McLinkWaveform_Ofdm = 0,
  McLinkWaveform_Scfdma = 1,
  McLinkWaveform_Gfdm = 2,
  McLinkWaveform_Fbmc = 3,
} McLinkWaveform;

/**
 * Opaque simulator handle.
 */
typedef struct McLinkSim McLinkSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mclink_version(void);

/**
 * Copies the most recent error message on this thread into `buf`
 * (truncated to `len - 1` bytes, always NUL-terminated). Returns the
 * full message length in bytes.
 *
 * # Safety
 * `buf` must point to at least `len` writable bytes, or be null.
 */
size_t mclink_last_error_message(char *buf, size_t len);

/**
 * Creates a simulator from a TOML configuration string.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum McLinkStatus mclink_sim_new_from_toml(const char *config_toml, struct McLinkSim **out);

/**
 * Creates a simulator from a TOML configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum McLinkStatus mclink_sim_new_from_file(const char *path, struct McLinkSim **out);

/**
 * Destroys a simulator handle. A null handle is a no-op.
 *
 * # Safety
 * `sim` must be a pointer previously returned by a constructor, or null.
 */
void mclink_sim_free(struct McLinkSim *sim);

/**
 * Overrides the master seed.
 *
 * # Safety
 * `sim` must be a valid handle.
 */
enum McLinkStatus mclink_sim_set_seed(struct McLinkSim *sim, uint64_t seed);

/**
 * Overrides the trial count.
 *
 * # Safety
 * `sim` must be a valid handle.
 */
enum McLinkStatus mclink_sim_set_trials(struct McLinkSim *sim, uint64_t trials);

/**
 * Monte-Carlo link run; writes errors.csv plus manifest into `out_dir`.
 *
 * # Safety
 * `sim` must be a valid handle and `out_dir` a NUL-terminated string.
 */
enum McLinkStatus mclink_sim_run_link(struct McLinkSim *sim, const char *out_dir);

/**
 * PAPR experiment. When `ccdf_threshold_out` is non-null it receives the
 * PAPR threshold (dB) at exceedance probability 1e-3.
 *
 * # Safety
 * `sim` must be a valid handle and `out_dir` a NUL-terminated string.
 */
enum McLinkStatus mclink_sim_run_papr(struct McLinkSim *sim,
                                      const char *out_dir,
                                      double *ccdf_threshold_out);

/**
 * PSD experiment. When `oob_ratio_out` is non-null it receives the
 * out-of-band leakage ratio in dB.
 *
 * # Safety
 * `sim` must be a valid handle and `out_dir` a NUL-terminated string.
 */
enum McLinkStatus mclink_sim_run_psd(struct McLinkSim *sim,
                                     const char *out_dir,
                                     double *oob_ratio_out);

/**
 * Analytic complexity counts; writes complexity.csv.
 *
 * # Safety
 * `sim` must be a valid handle and `out_dir` a NUL-terminated string.
 */
enum McLinkStatus mclink_sim_run_complexity(struct McLinkSim *sim, const char *out_dir);

/**
 * Sweep over SNR points or antenna counts; writes merged errors.csv.
 *
 * # Safety
 * `sim` must be a valid handle and `out_dir` a NUL-terminated string.
 */
enum McLinkStatus mclink_sim_sweep(struct McLinkSim *sim,
                                   const char *out_dir,
                                   enum McLinkSweepAxis axis);

/**
 * Total complex-multiplication count for detecting one frame; no handle
 * required.
 *
 * # Safety
 * `total_out` must be a valid pointer.
 */
enum McLinkStatus mclink_complexity_total(enum McLinkWaveform waveform,
                                          size_t b,
                                          size_t u,
                                          size_t k,
                                          size_t m,
                                          double *total_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MCLINK_H */
