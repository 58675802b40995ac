#ifndef GRADSHIFT_H
#define GRADSHIFT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum GsStatus {
  GS_STATUS_OK = 0,
  GS_STATUS_NULL_POINTER = 1,
  GS_STATUS_INVALID_UTF8 = 2,
  GS_STATUS_INVALID_ARGUMENT = 3,
  GS_STATUS_PARSE = 4,
  GS_STATUS_NON_HERMITIAN = 5,
  GS_STATUS_CONVERGENCE_FAILURE = 6,
  GS_STATUS_EMPTY_GAP_SET = 7,
  GS_STATUS_SINGULAR = 8,
  GS_STATUS_DEGENERATE_STENCIL = 9,
  GS_STATUS_INSUFFICIENT_STENCILS = 10,
  GS_STATUS_SHIFT_SELECTION_FAILURE = 11,
  GS_STATUS_DIMENSION_MISMATCH = 12,
  GS_STATUS_GAP_MISMATCH = 13,
  GS_STATUS_OUT_OF_RANGE = 14,
  GS_STATUS_INTERNAL = 15,
  GS_STATUS_PANIC = 16,
} GsStatus;

/**
 * Prepared circuit handle.
 */
typedef struct GsCircuit GsCircuit;

/**
 * Hermitian operator handle.
 */
typedef struct GsOperator GsOperator;

/**
 * Shift rule handle.
 */
typedef struct GsRule GsRule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next `gs_*` call on this thread.
 */
const char *gs_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from a `char **` out-parameter of this library and not be freed twice.
 */
void gs_string_free(char *s);

/**
 * Builds an operator from a catalog name (`"fsim:theta"`, `"pauli:XZ"`, ...),
 * inline generator JSON, or a path to a generator JSON file.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum GsStatus gs_operator_new(const char *spec, struct GsOperator **out);

/**
 * Hilbert-space dimension of the operator, or 0 for NULL.
 *
 * # Safety
 * `op` must be NULL or a live operator handle.
 */
uintptr_t gs_operator_dim(const struct GsOperator *op);

/**
 * Writes eigenvalues, gaps and multiplicities as a JSON object.
 *
 * # Safety
 * `op` must be a live operator handle; `out_json` must be writable.
 */
enum GsStatus gs_operator_analyze_json(const struct GsOperator *op, char **out_json);

/**
 * Copies up to `capacity` unique gaps into `buffer` and stores the total
 * count in `out_len`. Pass `capacity = 0` to query the count.
 *
 * # Safety
 * `buffer` must hold `capacity` doubles; `out_len` must be writable.
 */
enum GsStatus gs_operator_gaps(const struct GsOperator *op,
                               double *buffer,
                               uintptr_t capacity,
                               uintptr_t *out_len);

/**
 * # Safety
 * `op` must be NULL or a handle from [`gs_operator_new`], not freed before.
 */
void gs_operator_free(struct GsOperator *op);

/**
 * Builds a rule. `method` is a method name such as `"symmetric"` or
 * `"closed-s2"`. `shifts` may be NULL for the default stencil. `x` is used
 * only when `has_x` is true and is required by point-dependent methods.
 *
 * # Safety
 * `gaps` must hold `n_gaps` doubles and `shifts` `n_shifts` doubles (or be NULL).
 */
enum GsStatus gs_rule_build(const char *method,
                            const double *gaps,
                            uintptr_t n_gaps,
                            const double *shifts,
                            uintptr_t n_shifts,
                            bool has_x,
                            double x,
                            struct GsRule **out);

/**
 * Parses a rule from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GsStatus gs_rule_from_json(const char *json, struct GsRule **out);

/**
 * # Safety
 * `rule` must be a live rule handle; `out_json` must be writable.
 */
enum GsStatus gs_rule_to_json(const struct GsRule *rule, char **out_json);

/**
 * Number of terms, or 0 for NULL.
 *
 * # Safety
 * `rule` must be NULL or a live rule handle.
 */
uintptr_t gs_rule_len(const struct GsRule *rule);

/**
 * Shift and stored weight of term `index` (the chain factor is not applied).
 *
 * # Safety
 * `rule` must be a live rule handle; `shift` and `weight` must be writable.
 */
enum GsStatus gs_rule_term(const struct GsRule *rule,
                           uintptr_t index,
                           double *shift,
                           double *weight);

/**
 * # Safety
 * `rule` must be a live rule handle; `out` must be writable.
 */
enum GsStatus gs_rule_condition_number(const struct GsRule *rule, double *out);

/**
 * # Safety
 * `rule` must be a live rule handle; `out` must be writable.
 */
enum GsStatus gs_rule_chain_factor(const struct GsRule *rule, double *out);

/**
 * New rule with its chain factor multiplied by `dphi_dx`.
 *
 * # Safety
 * `rule` must be a live rule handle; `out` must be writable.
 */
enum GsStatus gs_rule_apply_chain(const struct GsRule *rule, double dphi_dx, struct GsRule **out);

/**
 * # Safety
 * `rule` must be NULL or a handle from this library, not freed before.
 */
void gs_rule_free(struct GsRule *rule);

/**
 * Parses and prepares a circuit from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum GsStatus gs_circuit_from_json(const char *json, struct GsCircuit **out);

/**
 * Dimension of the circuit, or 0 for NULL.
 *
 * # Safety
 * `circuit` must be NULL or a live circuit handle.
 */
uintptr_t gs_circuit_dim(const struct GsCircuit *circuit);

/**
 * # Safety
 * `circuit` must be a live circuit handle; `out` must be writable.
 */
enum GsStatus gs_circuit_expectation(const struct GsCircuit *circuit, double x, double *out);

/**
 * Analytic derivative, including the circuit's chain factor.
 *
 * # Safety
 * `circuit` must be a live circuit handle; `out` must be writable.
 */
enum GsStatus gs_circuit_exact_derivative(const struct GsCircuit *circuit, double x, double *out);

/**
 * Noise-free rule evaluation. Fails with `GapMismatch` when the rule does
 * not cover every generator gap.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum GsStatus gs_circuit_evaluate_rule(const struct GsCircuit *circuit,
                                       const struct GsRule *rule,
                                       double x,
                                       double *out);

/**
 * Finite-shot derivative estimate. The value goes to `out_value`; if
 * `out_json` is not NULL, the full estimate is written there as JSON.
 *
 * # Safety
 * Handles must be live; `out_value` must be writable; `out_json` may be NULL.
 */
enum GsStatus gs_circuit_estimate_derivative(const struct GsCircuit *circuit,
                                             const struct GsRule *rule,
                                             double x,
                                             uint64_t shots_per_term,
                                             uint64_t seed,
                                             double *out_value,
                                             char **out_json);

/**
 * # Safety
 * `circuit` must be NULL or a handle from this library, not freed before.
 */
void gs_circuit_free(struct GsCircuit *circuit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRADSHIFT_H */
