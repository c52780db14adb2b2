#ifndef DECAY_H
#define DECAY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum DecayStatus {
  DECAY_STATUS_OK = 0,
  DECAY_STATUS_NULL_POINTER = 1,
  DECAY_STATUS_DOMAIN = 2,
  DECAY_STATUS_RANGE = 3,
  DECAY_STATUS_SEARCH_FAILURE = 4,
  DECAY_STATUS_CONVERGENCE = 5,
  DECAY_STATUS_CONFIGURATION = 6,
  DECAY_STATUS_IO = 7,
  DECAY_STATUS_PANIC = 8,
} DecayStatus;

/**
 * Delta-shell model handle.
 */
typedef struct DecayDeltaShell DecayDeltaShell;

/**
 * Absorbing-detector model handle.
 */
typedef struct DecayDetector DecayDetector;

/**
 * Single-resonance model handle.
 */
typedef struct DecayResonance DecayResonance;

typedef struct DecayComplex {
  double re;
  double im;
} DecayComplex;

/**
 * One `(T, t)` history decomposition.
 */
typedef struct DecayHistory {
  double final_time;
  double t;
  double pp;
  double interference;
  double qq;
  double total;
} DecayHistory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *decay_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *decay_version(void);

/**
 * Faddeeva function `w(z) = exp(-z²) erfc(-iz)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum DecayStatus decay_faddeeva(double re, double im, struct DecayComplex *out);

/**
 * # Safety
 * `out` must be valid for writes. The handle written there must be released
 * with `decay_delta_shell_free`.
 */
enum DecayStatus decay_delta_shell_new(double eta, struct DecayDeltaShell **out);

/**
 * # Safety
 * `h` is NULL or a handle from `decay_delta_shell_new` not yet freed.
 */
void decay_delta_shell_free(struct DecayDeltaShell *h);

/**
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_delta_shell_survival_amplitude(const struct DecayDeltaShell *h,
                                                      double t,
                                                      struct DecayComplex *out);

/**
 * Probability of remaining in `[0, 1]` at time `t`.
 *
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_delta_shell_nonescape_probability(const struct DecayDeltaShell *h,
                                                         double t,
                                                         double *out);

/**
 * The `n`-th resonance pole (`n >= 1`, ordered by real part).
 *
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_delta_shell_resonance_pole(const struct DecayDeltaShell *h,
                                                  size_t n,
                                                  struct DecayComplex *out);

/**
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_delta_shell_decompose_survival(const struct DecayDeltaShell *h,
                                                      double final_time,
                                                      double t,
                                                      struct DecayHistory *out);

/**
 * Nonescape decomposition with `basis_size` box states; fails with
 * `DECAY_STATUS_CONVERGENCE` when the truncation estimate exceeds
 * `tolerance`. `estimate` may be NULL.
 *
 * # Safety
 * `h` is a live handle; `out` is valid for writes; `estimate` is NULL or
 * valid for writes.
 */
enum DecayStatus decay_delta_shell_decompose_nonescape(const struct DecayDeltaShell *h,
                                                       double final_time,
                                                       double t,
                                                       uint32_t basis_size,
                                                       double tolerance,
                                                       struct DecayHistory *out,
                                                       double *estimate);

/**
 * # Safety
 * `out` must be valid for writes. Release with `decay_detector_free`.
 */
enum DecayStatus decay_detector_new(double eta, double v0, struct DecayDetector **out);

/**
 * # Safety
 * `h` is NULL or a handle from `decay_detector_new` not yet freed.
 */
void decay_detector_free(struct DecayDetector *h);

/**
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_detector_survival_amplitude(const struct DecayDetector *h,
                                                   double t,
                                                   struct DecayComplex *out);

/**
 * The pole continued from the Hermitian resonance, in the outside
 * wavenumber `q`.
 *
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_detector_pole(const struct DecayDetector *h, struct DecayComplex *out);

/**
 * Number of localized states found at construction.
 *
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_detector_localized_count(const struct DecayDetector *h, size_t *out);

/**
 * Complex energy `q_j² - iV₀` of localized state `index` (from 0).
 *
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_detector_localized_energy(const struct DecayDetector *h,
                                                 size_t index,
                                                 struct DecayComplex *out);

/**
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_detector_decompose_survival(const struct DecayDetector *h,
                                                   double final_time,
                                                   double t,
                                                   struct DecayHistory *out);

/**
 * # Safety
 * `out` must be valid for writes. Release with `decay_resonance_free`.
 */
enum DecayStatus decay_resonance_new(double re, double im, struct DecayResonance **out);

/**
 * # Safety
 * `h` is NULL or a handle from `decay_resonance_new` not yet freed.
 */
void decay_resonance_free(struct DecayResonance *h);

/**
 * Closed-form survival amplitude.
 *
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_resonance_survival_amplitude(const struct DecayResonance *h,
                                                    double t,
                                                    struct DecayComplex *out);

/**
 * Survival amplitude by contour integration.
 *
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_resonance_survival_amplitude_contour(const struct DecayResonance *h,
                                                            double t,
                                                            struct DecayComplex *out);

/**
 * # Safety
 * `h` is a live handle; `out` is valid for writes.
 */
enum DecayStatus decay_resonance_decompose_survival(const struct DecayResonance *h,
                                                    double final_time,
                                                    double t,
                                                    struct DecayHistory *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DECAY_H */
