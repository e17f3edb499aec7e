#ifndef MAJORANA_H
#define MAJORANA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every exported call.
 */
typedef enum MajStatus {
  MAJ_STATUS_OK = 0,
  MAJ_STATUS_INVALID_INPUT = 1,
  MAJ_STATUS_LABEL_MISMATCH = 2,
  MAJ_STATUS_RANGE = 3,
  MAJ_STATUS_NON_CONVERGENCE = 4,
  MAJ_STATUS_DEGENERATE = 5,
  MAJ_STATUS_STEP_UNDERFLOW = 6,
  MAJ_STATUS_IO = 7,
  MAJ_STATUS_NULL_POINTER = 8,
  MAJ_STATUS_BUFFER_TOO_SMALL = 9,
  MAJ_STATUS_PANIC = 10,
} MajStatus;

/**
 * Spin Hamiltonians available without passing a matrix.
 */
typedef enum MajBuiltin {
  MAJ_BUILTIN_SZ = 0,
  MAJ_BUILTIN_SZ2 = 1,
  MAJ_BUILTIN_SX = 2,
  MAJ_BUILTIN_SY = 3,
} MajBuiltin;

/**
 * Opaque constellation of 2S stars.
 */
typedef struct MajConstellation MajConstellation;

/**
 * Opaque normalized spin state.
 */
typedef struct MajState MajState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message (NUL terminated).
 * `needed` (optional) receives the required size in bytes.
 *
 * # Safety
 * `buf` must point to `len` writable bytes; `needed` may be null.
 */
enum MajStatus maj_last_error_message(char *buf, size_t len, size_t *needed);

/**
 * Builds a state from `2 S + 1` interleaved amplitudes, ordered by
 * `m = -S .. S`; the vector is normalized.
 *
 * # Safety
 * `amplitudes` must hold `2 * (two_s + 1)` doubles; `out` must be writable.
 */
enum MajStatus maj_state_new(uint32_t two_s,
                             const double *amplitudes,
                             size_t count,
                             struct MajState **out);

/**
 * Coherent state whose 2S-fold star sits at `-1 / (re + i im)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MajStatus maj_state_coherent(uint32_t two_s, double re, double im, struct MajState **out);

/**
 * `(|S,S> - |S,-S>) / sqrt 2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum MajStatus maj_state_noon(uint32_t two_s, struct MajState **out);

/**
 * Parses `{"twoS": n, "amplitudes": [[re, im], ...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum MajStatus maj_state_from_json(const char *json, struct MajState **out);

/**
 * Writes the state's JSON form into `buf`.
 *
 * # Safety
 * `state` must be a live handle, `buf` must hold `len` bytes, `needed` may be null.
 */
enum MajStatus maj_state_to_json(const struct MajState *state,
                                 char *buf,
                                 size_t len,
                                 size_t *needed);

/**
 * Releases a state; null is ignored.
 *
 * # Safety
 * `state` must come from this library and not be used afterwards.
 */
void maj_state_free(struct MajState *state);

/**
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum MajStatus maj_state_two_s(const struct MajState *state, uint32_t *out);

/**
 * Copies the `2 S + 1` amplitudes as interleaved doubles.
 *
 * # Safety
 * `state` must be a live handle; `out` must hold `len` doubles.
 */
enum MajStatus maj_state_amplitudes(const struct MajState *state, double *out, size_t len);

/**
 * `|<a|b>|^2`.
 *
 * # Safety
 * Both handles must be live; `out` writable.
 */
enum MajStatus maj_fidelity(const struct MajState *a, const struct MajState *b, double *out);

/**
 * Cumulative multipole strength `A_M`.
 *
 * # Safety
 * `state` must be live; `out` writable.
 */
enum MajStatus maj_quantumness(const struct MajState *state, uint32_t m, double *out);

/**
 * Husimi function at polar angle `theta`, azimuth `phi`.
 *
 * # Safety
 * `state` must be live; `out` writable.
 */
enum MajStatus maj_husimi_q(const struct MajState *state, double theta, double phi, double *out);

/**
 * Evolves under `coupling * builtin` for time `t` (exactly, by
 * diagonalization) into a new state.
 *
 * # Safety
 * `state` must be live; `out` writable.
 */
enum MajStatus maj_evolve_builtin(const struct MajState *state,
                                  enum MajBuiltin builtin,
                                  double coupling,
                                  double t,
                                  struct MajState **out);

/**
 * Stars of a state.
 *
 * # Safety
 * `state` must be live; `out` writable.
 */
enum MajStatus maj_state_to_constellation(const struct MajState *state,
                                          struct MajConstellation **out);

/**
 * Constellation from `finite_count` interleaved chart roots plus stars at
 * infinity; the total must be 2S.
 *
 * # Safety
 * `roots` must hold `2 * finite_count` doubles; `out` writable.
 */
enum MajStatus maj_constellation_from_roots(uint32_t two_s,
                                            const double *roots,
                                            size_t finite_count,
                                            size_t infinity_count,
                                            struct MajConstellation **out);

/**
 * State (canonical phase) whose stars are `c`.
 *
 * # Safety
 * `c` must be live; `out` writable.
 */
enum MajStatus maj_constellation_to_state(const struct MajConstellation *c, struct MajState **out);

/**
 * # Safety
 * `c` must be live; both outputs writable.
 */
enum MajStatus maj_constellation_counts(const struct MajConstellation *c,
                                        size_t *finite,
                                        size_t *infinity);

/**
 * Finite roots as interleaved doubles.
 *
 * # Safety
 * `c` must be live; `out` must hold `len` doubles.
 */
enum MajStatus maj_constellation_roots(const struct MajConstellation *c, double *out, size_t len);

/**
 * All 2S stars as `(theta, phi)` pairs; stars at infinity are `(pi, 0)`.
 *
 * # Safety
 * `c` must be live; `out` must hold `len` doubles.
 */
enum MajStatus maj_constellation_angles(const struct MajConstellation *c, double *out, size_t len);

/**
 * Releases a constellation; null is ignored.
 *
 * # Safety
 * `c` must come from this library and not be used afterwards.
 */
void maj_constellation_free(struct MajConstellation *c);

/**
 * Multi-start minimization of `A_M` over 2S-star constellations.
 *
 * The best constellation and its objective are written even when no
 * restart converged; the status is then `MAJ_STATUS_NON_CONVERGENCE`.
 *
 * # Safety
 * Both outputs must be writable.
 */
enum MajStatus maj_kings_minimize(uint32_t two_s,
                                  uint32_t m,
                                  size_t restarts,
                                  uint64_t seed,
                                  struct MajConstellation **out,
                                  double *objective);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAJORANA_H */
