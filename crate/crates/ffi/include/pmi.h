#ifndef PMI_H
#define PMI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PmiStatus {
  PMI_STATUS_OK = 0,
  PMI_STATUS_NULL_POINTER = 1,
  PMI_STATUS_INVALID_UTF8 = 2,
  PMI_STATUS_PARSE = 3,
  PMI_STATUS_VALIDATION = 4,
  PMI_STATUS_NUMERICAL = 5,
  PMI_STATUS_PANIC = 6,
} PmiStatus;

// Which program to solve.
typedef enum PmiMode {
  // Encoding revealed after the measurement.
  PMI_MODE_PMI = 0,
  // Encoding never revealed.
  PMI_MODE_STANDARD = 1,
} PmiMode;

// Opaque Clifford encoding handle.
typedef struct PmiClifford PmiClifford;

// Opaque ensemble handle.
typedef struct PmiEnsemble PmiEnsemble;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or NULL. Valid until
// the next call into this library from the same thread.
const char *pmi_last_error_message(void);

// Library version, static storage.
const char *pmi_version(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void pmi_string_free(char *s);

// Parses and validates an ensemble from its JSON description.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum PmiStatus pmi_ensemble_from_json(const char *json, struct PmiEnsemble **out);

// # Safety
// `e` must come from [`pmi_ensemble_from_json`] and not have been freed.
void pmi_ensemble_free(struct PmiEnsemble *e);

// Dimension, number of strings and number of encodings. Any output may be NULL.
//
// # Safety
// `e` must be a live handle.
enum PmiStatus pmi_ensemble_shape(const struct PmiEnsemble *e,
                                  size_t *dim,
                                  size_t *strings,
                                  size_t *encodings);

// Solves the chosen program. `tol <= 0` selects the default tolerance.
// If `solution_json` is not NULL it receives the full solution (value,
// certificate, measurement) as JSON.
//
// # Safety
// `e` must be a live handle; outputs must be writable or NULL.
enum PmiStatus pmi_solve(const struct PmiEnsemble *e,
                         enum PmiMode mode,
                         double tol,
                         double *value,
                         char **solution_json);

// Gain from the announced encoding, with the summed duality gaps.
//
// # Safety
// `e` must be a live handle; outputs must be writable or NULL.
enum PmiStatus pmi_delta(const struct PmiEnsemble *e,
                         double tol,
                         double *value,
                         double *uncertainty);

// Partition lower bound and the best power upper bound over the default
// exponents. Needs a product-uniform prior.
//
// # Safety
// `e` must be a live handle; outputs must be writable or NULL.
enum PmiStatus pmi_bounds(const struct PmiEnsemble *e, double tol, double *lower, double *upper);

// Parses a Clifford encoding from JSON.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum PmiStatus pmi_clifford_from_json(const char *json, struct PmiClifford **out);

// # Safety
// `c` must come from [`pmi_clifford_from_json`] and not have been freed.
void pmi_clifford_free(struct PmiClifford *c);

// Closed-form analysis. `useless` is set to 1 when the announced encoding
// cannot help. The full per-partition table goes to `analysis_json` if not NULL.
//
// # Safety
// `c` must be a live handle; outputs must be writable or NULL.
enum PmiStatus pmi_clifford_analyze(const struct PmiClifford *c,
                                    double *p_pmi,
                                    int32_t *useless,
                                    char **analysis_json);

// Ensemble of the encoding, for use with the solver calls.
//
// # Safety
// `c` must be a live handle; `out` must be writable.
enum PmiStatus pmi_clifford_to_ensemble(const struct PmiClifford *c, struct PmiEnsemble **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PMI_H */
