#ifndef LOBC_H
#define LOBC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Nonzero values other than `NullPointer` and `Panic` mirror
 * the CLI exit codes' categories.
 */
typedef enum LobcStatus {
  LOBC_STATUS_OK = 0,
  LOBC_STATUS_NULL_POINTER = 1,
  LOBC_STATUS_INVALID_ARGUMENT = 2,
  LOBC_STATUS_ORACLE_DISAGREEMENT = 3,
  LOBC_STATUS_BRANCH_OVERFLOW = 4,
  LOBC_STATUS_IO = 5,
  LOBC_STATUS_PANIC = 6,
} LobcStatus;

/**
 * A two-qubit gate.
 */
typedef struct LobcGate LobcGate;

/**
 * The report of one harness run.
 */
typedef struct LobcReport LobcReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *lobc_version(void);

/**
 * Message for the last failed call on this thread. Valid until the next
 * failing call on the same thread; empty if none failed.
 */
const char *lobc_last_error(void);

/**
 * Parses a gate spec (`cnot`, `0.3,0.5,0.7`, `haar:17`, ...).
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LobcStatus lobc_gate_from_spec(const char *spec, struct LobcGate **out);

/**
 * Builds a gate from a row-major 4x4 matrix given as separate real and
 * imaginary arrays of 16 entries each.
 *
 * # Safety
 * `re` and `im` must each point to 16 doubles; `out` must be valid.
 */
enum LobcStatus lobc_gate_from_matrix(const double *re, const double *im, struct LobcGate **out);

/**
 * # Safety
 * `gate` must come from a `lobc_gate_*` constructor and not be used afterwards.
 */
void lobc_gate_free(struct LobcGate *gate);

/**
 * Canonical angles `(α, β, γ)` of the gate's decomposition.
 *
 * # Safety
 * All pointers must be valid.
 */
enum LobcStatus lobc_gate_canonical_angles(const struct LobcGate *gate,
                                           double *alpha,
                                           double *beta,
                                           double *gamma);

/**
 * Whether the gate is in L (all canonical angles multiples of π/4) and
 * whether it is nonentangling.
 *
 * # Safety
 * All pointers must be valid.
 */
enum LobcStatus lobc_gate_classify(const struct LobcGate *gate,
                                   bool *in_l_out,
                                   bool *nonentangling);

/**
 * Runs one harness command (`run`, `enumerate`, `classify`, ...). `config_json`
 * is a JSON object overriding configuration defaults, e.g.
 * `{"protocol":"u2","gate":"0.3,0.5,0.7","rounds":2,"trials":1000}`; it may
 * be NULL.
 *
 * # Safety
 * `command` must be a NUL-terminated string, `config_json` NULL or
 * NUL-terminated, and `out` valid.
 */
enum LobcStatus lobc_execute(const char *command, const char *config_json, struct LobcReport **out);

/**
 * The report as JSON. The string is owned by the report.
 *
 * # Safety
 * `report` must be a live handle from [`lobc_execute`].
 */
const char *lobc_report_json(const struct LobcReport *report);

/**
 * Measured and predicted success probability of a protocol run.
 *
 * # Safety
 * All pointers must be valid.
 */
enum LobcStatus lobc_report_success(const struct LobcReport *report,
                                    double *measured,
                                    double *predicted);

/**
 * Allocated ebits and broadcast classical bits of a protocol run.
 *
 * # Safety
 * All pointers must be valid.
 */
enum LobcStatus lobc_report_ledger(const struct LobcReport *report,
                                   double *allocated_ebits,
                                   uint64_t *cbits);

/**
 * # Safety
 * `report` must come from [`lobc_execute`] and not be used afterwards.
 */
void lobc_report_free(struct LobcReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOBC_H */
