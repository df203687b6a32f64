#ifndef SCB_H
#define SCB_H

/* Generated by cbindgen from the scb-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum ScbStatus {
  SCB_STATUS_OK = 0,
  SCB_STATUS_NULL_POINTER = 1,
  /**
   * An argument violates a documented precondition.
   */
  SCB_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A configuration could not be parsed.
   */
  SCB_STATUS_CONFIG = 3,
  /**
   * Output buffer too small; the required length is reported where possible.
   */
  SCB_STATUS_BUFFER_TOO_SMALL = 4,
  SCB_STATUS_IO = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  SCB_STATUS_INTERNAL = 6,
} ScbStatus;

/**
 * Receive mode selector for [`scb_simulate`].
 */
typedef enum ScbMode {
  SCB_MODE_MULTI = 0,
  SCB_MODE_SINGLE = 1,
  SCB_MODE_SUBCARRIER = 2,
} ScbMode;

/**
 * Opaque set of spectrally placed Zadoff-Chu codes.
 */
typedef struct ScbCodeSet ScbCodeSet;

/**
 * Opaque run configuration.
 */
typedef struct ScbConfig ScbConfig;

/**
 * Opaque per-beam range profiles produced by a simulation.
 */
typedef struct ScbProfiles ScbProfiles;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *scb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *scb_version(void);

/**
 * Writes the `n_zc` samples of the Zadoff-Chu sequence with seed `q`.
 *
 * # Safety
 * `re` and `im` must point to at least `cap` writable doubles.
 */
enum ScbStatus scb_zc_generate(uint64_t q, uint64_t n_zc, double *re, double *im, size_t cap);

/**
 * Largest aperiodic autocorrelation side peak over the zero-lag peak.
 *
 * # Safety
 * `re` and `im` must point to `len` readable doubles; `out` must be writable.
 */
enum ScbStatus scb_side_peak_ratio(const double *re, const double *im, size_t len, double *out);

/**
 * Builds `n_codes` full-band codes of prime length `n_zc` in `n` bins.
 *
 * # Safety
 * `out` must be a valid pointer; on success it receives a handle to be
 * released with [`scb_code_set_free`].
 */
enum ScbStatus scb_code_set_new(uint64_t n_zc, size_t n_codes, size_t n, struct ScbCodeSet **out);

/**
 * Number of codes in the set (0 for a null handle).
 *
 * # Safety
 * `set` must be null or a live handle.
 */
size_t scb_code_set_len(const struct ScbCodeSet *set);

/**
 * Seed of code `index`.
 *
 * # Safety
 * `set` must be a live handle and `out` writable.
 */
enum ScbStatus scb_code_set_seed(const struct ScbCodeSet *set, size_t index, uint64_t *out);

/**
 * Copies the `n` time-domain samples of code `index`.
 *
 * # Safety
 * `set` must be a live handle; `re` and `im` must hold `cap` doubles.
 */
enum ScbStatus scb_code_set_samples(const struct ScbCodeSet *set,
                                    size_t index,
                                    double *re,
                                    double *im,
                                    size_t cap);

/**
 * # Safety
 * `set` must be null or a handle not yet freed.
 */
void scb_code_set_free(struct ScbCodeSet *set);

/**
 * Parses a TOML run configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` writable.
 */
enum ScbStatus scb_config_from_toml(const char *toml, struct ScbConfig **out);

/**
 * Loads one of the shipped presets by name (for example "figure8").
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` writable.
 */
enum ScbStatus scb_config_preset(const char *name, struct ScbConfig **out);

/**
 * Overrides the noise seed of a configuration.
 *
 * # Safety
 * `cfg` must be a live handle.
 */
enum ScbStatus scb_config_set_noise_seed(struct ScbConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void scb_config_free(struct ScbConfig *cfg);

/**
 * Runs transmit, propagation and receive processing for the configured
 * system and scenario, producing one range profile per beam.
 *
 * # Safety
 * `cfg` must be a live handle and `out` writable.
 */
enum ScbStatus scb_simulate(const struct ScbConfig *cfg,
                            enum ScbMode mode,
                            struct ScbProfiles **out);

/**
 * Number of beams (0 for a null handle).
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t scb_profiles_count(const struct ScbProfiles *p);

/**
 * Bins per profile (0 for a null or empty handle).
 *
 * # Safety
 * `p` must be null or a live handle.
 */
size_t scb_profiles_bins(const struct ScbProfiles *p);

/**
 * Metres per profile bin (0 for a null or empty handle).
 *
 * # Safety
 * `p` must be null or a live handle.
 */
double scb_profiles_bin_to_meters(const struct ScbProfiles *p);

/**
 * Copies the magnitudes of beam `index` and reports its steering angle.
 *
 * # Safety
 * `p` must be a live handle, `theta_deg` writable (or null) and
 * `magnitudes` must hold `cap` doubles.
 */
enum ScbStatus scb_profiles_get(const struct ScbProfiles *p,
                                size_t index,
                                double *theta_deg,
                                double *magnitudes,
                                size_t cap);

/**
 * # Safety
 * `p` must be null or a handle not yet freed.
 */
void scb_profiles_free(struct ScbProfiles *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCB_H */
