#ifndef PAIRSCAT_H
#define PAIRSCAT_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

enum PairscatStatus {
  PAIRSCAT_STATUS_OK = 0,
  PAIRSCAT_STATUS_NULL_POINTER = 1,
  PAIRSCAT_STATUS_INVALID_UTF8 = 2,
  PAIRSCAT_STATUS_DOMAIN = 3,
  PAIRSCAT_STATUS_NUMERICAL = 4,
  PAIRSCAT_STATUS_CONFIG = 5,
  PAIRSCAT_STATUS_PARSE = 6,
  PAIRSCAT_STATUS_IO = 7,
  PAIRSCAT_STATUS_MISSING_ENTRIES = 8,
  PAIRSCAT_STATUS_INVARIANT = 9,
  PAIRSCAT_STATUS_PANIC = 10,
};

enum PairscatInitialKind {
  // (|ab⟩ + |ba⟩)/√2
  PAIRSCAT_INITIAL_KIND_PLUS = 0,
  // (|ab⟩ − |ba⟩)/√2
  PAIRSCAT_INITIAL_KIND_MINUS = 1,
  // The unentangled pair |ab⟩.
  PAIRSCAT_INITIAL_KIND_PAIR = 2,
  // cos α|ab⟩ + e^{iβ} sin α|ba⟩; uses `alpha` and `beta`.
  PAIRSCAT_INITIAL_KIND_ENTANGLED = 3,
};

enum PairscatRoute {
  PAIRSCAT_ROUTE_INCOMING = 0,
  PAIRSCAT_ROUTE_OUTGOING = 1,
  // Closed form for (4,0) → (2,2) only.
  PAIRSCAT_ROUTE_REDUCED = 2,
};

// Opaque amplitude set for one (initial, final) choice.
struct PairscatAmplitudes;

// Opaque T-matrix set.
struct PairscatTmx;

// Single-molecule state |j m v⟩.
struct PairscatState {
  int32_t j;
  int32_t m;
  int32_t v;
};

struct PairscatInitial {
  enum PairscatInitialKind kind;
  double alpha;
  double beta;
};

// Final molecule-pair levels (j1 v1)(j2 v2); projections are summed.
struct PairscatFinal {
  int32_t j1;
  int32_t v1;
  int32_t j2;
  int32_t v2;
};

// Product preparation split into an entangled part and two satellites.
struct PairscatDecomposition {
  double y;
  double alpha;
  double beta;
  double global_phase;
  double satellite1_re;
  double satellite1_im;
  double satellite2_re;
  double satellite2_im;
};

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *pairscat_version(void);

// Status of the last failing call on this thread, or OK if none.
enum PairscatStatus pairscat_last_error_code(void);

// Message of the last failing call on this thread, or NULL. The pointer
// stays valid until the next failing call or `pairscat_clear_error` on
// the same thread.
const char *pairscat_last_error_message(void);

void pairscat_clear_error(void);

// Loads a T-matrix file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be valid for writes.
enum PairscatStatus pairscat_tmx_load(const char *path, struct PairscatTmx **out);

// Seeded random unitary H₂ + H₂ set (para levels, v = 0) for testing.
//
// # Safety
// `out` must be valid for writes.
enum PairscatStatus pairscat_tmx_synthesize(double e_k,
                                            struct PairscatState a,
                                            struct PairscatState b,
                                            int32_t j_max,
                                            int32_t big_j_max,
                                            uint64_t seed,
                                            bool exchange_symmetric,
                                            struct PairscatTmx **out);

// # Safety
// `tmx` must be a live handle; `path` a NUL-terminated string.
enum PairscatStatus pairscat_tmx_save(const struct PairscatTmx *tmx, const char *path);

// Number of stored T entries.
//
// # Safety
// `tmx` must be a live handle; `out` valid for writes.
enum PairscatStatus pairscat_tmx_len(const struct PairscatTmx *tmx, size_t *out);

// Collision (kinetic) energy of the set, cm⁻¹.
//
// # Safety
// `tmx` must be a live handle; `out` valid for writes.
enum PairscatStatus pairscat_tmx_collision_energy(const struct PairscatTmx *tmx, double *out);

// # Safety
// `tmx` must be NULL or a handle not yet freed.
void pairscat_tmx_free(struct PairscatTmx *tmx);

// Builds the partial-wave amplitudes for the initial pair (a, b) and a
// final level pair. The result does not borrow `tmx`.
//
// # Safety
// `tmx` must be a live handle; `out` valid for writes.
enum PairscatStatus pairscat_amplitudes_new(const struct PairscatTmx *tmx,
                                            struct PairscatState a,
                                            struct PairscatState b,
                                            struct PairscatInitial initial,
                                            struct PairscatFinal final_levels,
                                            enum PairscatRoute route,
                                            struct PairscatAmplitudes **out);

// σ(θ) in Å²/sr.
//
// # Safety
// `amps` must be a live handle; `out` valid for writes.
enum PairscatStatus pairscat_amplitudes_sigma(const struct PairscatAmplitudes *amps,
                                              double theta,
                                              double *out);

// σ(θᵢ) for `n` angles.
//
// # Safety
// `thetas` must be valid for `n` reads and `out` for `n` writes.
enum PairscatStatus pairscat_amplitudes_sigma_grid(const struct PairscatAmplitudes *amps,
                                                   const double *thetas,
                                                   size_t n,
                                                   double *out);

// Integral cross section (Å²) from the partial-wave coefficients.
//
// # Safety
// `amps` must be a live handle; `out` valid for writes.
enum PairscatStatus pairscat_amplitudes_total(const struct PairscatAmplitudes *amps, double *out);

// # Safety
// `amps` must be NULL or a handle not yet freed.
void pairscat_amplitudes_free(struct PairscatAmplitudes *amps);

// d_c = |100(σ⁺ − σ⁻)/σ_ref| in percent.
//
// # Safety
// `out` must be valid for writes.
enum PairscatStatus pairscat_control_metric(double sigma_plus,
                                            double sigma_minus,
                                            double sigma_ref,
                                            double *out);

// Splits (cos α₁|a⟩ + e^{iβ₁} sin α₁|b⟩)(cos α₂|a⟩ + e^{iβ₂} sin α₂|b⟩).
//
// # Safety
// `out` must be valid for writes.
enum PairscatStatus pairscat_decompose(double alpha1,
                                       double beta1,
                                       double alpha2,
                                       double beta2,
                                       struct PairscatDecomposition *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAIRSCAT_H */
