#ifndef QSCC_H
#define QSCC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QsccStatus {
  QSCC_STATUS_OK = 0,
  QSCC_STATUS_NULL_POINTER = 1,
  QSCC_STATUS_INVALID_INPUT = 2,
  QSCC_STATUS_IO = 3,
  QSCC_STATUS_PARSE = 4,
  QSCC_STATUS_AXIOM_VIOLATION = 5,
  QSCC_STATUS_DIMENSION_MISMATCH = 6,
  QSCC_STATUS_SOURCE_MISMATCH = 7,
  QSCC_STATUS_NUMERICAL_FAILURE = 8,
  QSCC_STATUS_PANIC = 9,
} QsccStatus;

typedef struct QsccBialgebra QsccBialgebra;

// An operator map; functionals are the `1 × 1` case.
typedef struct QsccOperatorMap QsccOperatorMap;

typedef struct QsccStepFunction QsccStepFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next `qscc_*` call on this thread.
const char *qscc_last_error(void);

// # Safety
// `s` must come from a `qscc_*` function returning an owned string, or be null.
void qscc_string_free(char *s);

// Loads and validates a bialgebra file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum QsccStatus qscc_bialgebra_load(const char *path, struct QsccBialgebra **out);

// Parses and validates a bialgebra from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum QsccStatus qscc_bialgebra_from_json(const char *json, struct QsccBialgebra **out);

// A bundled fixture such as `"c_z3"` or `"cg_s3"`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum QsccStatus qscc_bialgebra_fixture(const char *name, struct QsccBialgebra **out);

// # Safety
// `b` must come from a `qscc_bialgebra_*` constructor, or be null.
void qscc_bialgebra_free(struct QsccBialgebra *b);

// Dimension, or 0 for a null handle.
//
// # Safety
// `b` must be a live handle or null.
uintptr_t qscc_bialgebra_dim(const struct QsccBialgebra *b);

// Writes the 64 hex digits of the content hash plus a NUL into `buf`.
//
// # Safety
// `b` must be a live handle; `buf` must hold at least 65 bytes.
enum QsccStatus qscc_bialgebra_fingerprint(const struct QsccBialgebra *b, char *buf);

// Parses an operator-map file against `b`.
//
// # Safety
// `b` must be a live handle, `json` NUL-terminated, `out` writable.
enum QsccStatus qscc_map_from_json(const struct QsccBialgebra *b,
                                   const char *json,
                                   struct QsccOperatorMap **out);

// Serializes a map; release the string with [`qscc_string_free`].
//
// # Safety
// `m` must be a live handle and `out` writable.
enum QsccStatus qscc_map_to_json(const struct QsccOperatorMap *m, char **out);

// # Safety
// `m` must come from a `qscc_*` constructor, or be null.
void qscc_map_free(struct QsccOperatorMap *m);

// Row count of the map's values, or 0 for a null handle.
//
// # Safety
// `m` must be a live handle or null.
uintptr_t qscc_map_rows(const struct QsccOperatorMap *m);

// Parses a step function `[[t_end, [[re, im], ...]], ...]`.
//
// # Safety
// `json` must be NUL-terminated and `out` writable.
enum QsccStatus qscc_step_function_from_json(const char *json, struct QsccStepFunction **out);

// # Safety
// `f` must come from [`qscc_step_function_from_json`], or be null.
void qscc_step_function_free(struct QsccStepFunction *f);

// `λ_t(x)` for the convolution semigroup generated by the functional `gamma`.
// `coords` holds `2·len` interleaved doubles; the value goes to `out[0..2]`.
//
// # Safety
// Handles must be live; `coords` must hold `2·len` doubles and `out` 2.
enum QsccStatus qscc_semigroup_eval(const struct QsccBialgebra *b,
                                    const struct QsccOperatorMap *gamma,
                                    double t,
                                    const double *coords,
                                    uintptr_t len,
                                    double *out);

// `⟨ε(f′), l_t(x) ε(f)⟩` for the cocycle generated by `phi`.
//
// # Safety
// Handles must be live; `coords` must hold `2·len` doubles and `out` 2.
enum QsccStatus qscc_matrix_element(const struct QsccBialgebra *b,
                                    const struct QsccOperatorMap *phi,
                                    const double *coords,
                                    uintptr_t len,
                                    const struct QsccStepFunction *f,
                                    const struct QsccStepFunction *fp,
                                    double t,
                                    double *out);

// Largest residual of the ε-structure relation, reality and `φ(1) = 0`.
//
// # Safety
// Handles must be live and `out` writable.
enum QsccStatus qscc_structure_residual(const struct QsccBialgebra *b,
                                        const struct QsccOperatorMap *phi,
                                        double *out);

// GNS reconstruction: writes the generator handle and its noise dimension.
//
// # Safety
// Handles must be live; `out` and `noise_dim` writable.
enum QsccStatus qscc_gns(const struct QsccBialgebra *b,
                         const struct QsccOperatorMap *gamma,
                         struct QsccOperatorMap **out,
                         uintptr_t *noise_dim);

// Compound-Poisson Monte Carlo on a named group (`"z<n>"`, `"s3"`, `"d4"`).
// `mu` and `out_freqs` hold one entry per group element.
//
// # Safety
// `group` must be NUL-terminated; `mu` and `out_freqs` must hold `n` doubles.
enum QsccStatus qscc_montecarlo(const char *group,
                                double rate,
                                const double *mu,
                                uintptr_t n,
                                double t,
                                uintptr_t samples,
                                uint64_t seed,
                                double *out_freqs);

// Reference law `λ_t(δ_g)` of the same process from the convolution semigroup.
//
// # Safety
// As [`qscc_montecarlo`].
enum QsccStatus qscc_compound_poisson_law(const char *group,
                                          double rate,
                                          const double *mu,
                                          uintptr_t n,
                                          double t,
                                          double *out_law);

// Runs a named battery and writes the JSON report to `out_path`.
// `passed` receives 1 if every case passed, else 0.
//
// # Safety
// Strings must be NUL-terminated and `passed` writable.
enum QsccStatus qscc_run_report(const char *battery,
                                uint64_t seed,
                                uintptr_t samples,
                                uintptr_t cases,
                                const char *out_path,
                                int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSCC_H */
