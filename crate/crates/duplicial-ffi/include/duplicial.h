#ifndef DUPLICIAL_H
#define DUPLICIAL_H

/* Generated by cbindgen from crates/duplicial-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which product to invert in [`dup_series_invert`].
 */
typedef enum DupProduct {
  DUP_PRODUCT_OVER = 0,
  DUP_PRODUCT_UNDER = 1,
  DUP_PRODUCT_COMPOSE = 2,
} DupProduct;

/**
 * Status codes shared by every fallible function.
 */
typedef enum DupStatus {
  /**
   * The call succeeded.
   */
  DUP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DUP_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  DUP_STATUS_UTF8 = 2,
  /**
   * A tree literal or series document failed to parse.
   */
  DUP_STATUS_PARSE = 3,
  /**
   * The request exceeds a resource cap.
   */
  DUP_STATUS_CAP = 4,
  /**
   * The operation is undefined for these operands.
   */
  DUP_STATUS_DOMAIN = 5,
  /**
   * A JSON document was well formed but violated the schema.
   */
  DUP_STATUS_JSON = 6,
  /**
   * The library panicked; the handle arguments are still valid.
   */
  DUP_STATUS_PANIC = 7,
} DupStatus;

/**
 * Opaque rotation-lattice handle.
 */
typedef struct DupLattice DupLattice;

/**
 * Opaque tree-expanded series handle.
 */
typedef struct DupSeries DupSeries;

/**
 * Opaque planar binary tree handle.
 */
typedef struct DupTree DupTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The most recent error message on this thread; empty when no call has
 * failed yet. The pointer is invalidated by the next failing call on the
 * same thread.
 */
const char *dup_last_error_message(void);

/**
 * Frees a string returned by this library. Null is ignored.
 *
 * # Safety
 * `text` must have been returned by a `dup_` function and not freed yet.
 */
void dup_string_free(char *text);

/**
 * Parses a tree literal such as `"((..).)"`.
 *
 * # Safety
 * `literal` must be nul-terminated; `out` must be a valid pointer.
 */
enum DupStatus dup_tree_parse(const char *literal, struct DupTree **out);

/**
 * # Safety
 * `tree` must come from this library and not be freed twice.
 */
void dup_tree_free(struct DupTree *tree);

/**
 * Writes the canonical literal of the tree.
 *
 * # Safety
 * `tree` must be a live handle; `out` must be a valid pointer.
 */
enum DupStatus dup_tree_to_string(const struct DupTree *tree, char **out);

/**
 * Number of internal vertices.
 *
 * # Safety
 * `tree` must be a live handle; `out` must be a valid pointer.
 */
enum DupStatus dup_tree_order(const struct DupTree *tree, size_t *out);

/**
 * Grafts the root of `left` onto the leftmost leaf of `right`.
 *
 * # Safety
 * Both handles must be live; `out` must be a valid pointer.
 */
enum DupStatus dup_tree_over(const struct DupTree *left,
                             const struct DupTree *right,
                             struct DupTree **out);

/**
 * Grafts the root of `right` onto the rightmost leaf of `left`.
 *
 * # Safety
 * Both handles must be live; `out` must be a valid pointer.
 */
enum DupStatus dup_tree_under(const struct DupTree *left,
                              const struct DupTree *right,
                              struct DupTree **out);

/**
 * Joins two trees as the children of a new root.
 *
 * # Safety
 * Both handles must be live; `out` must be a valid pointer.
 */
enum DupStatus dup_tree_graft(const struct DupTree *left,
                              const struct DupTree *right,
                              struct DupTree **out);

/**
 * Number of trees with `n` internal vertices. Capped at `n <= 36` so the
 * count fits in 64 bits.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DupStatus dup_tree_count(size_t n, uint64_t *out);

/**
 * Builds one of the catalog series (A, B, C, D, E, R, L) at the given
 * truncation order.
 *
 * # Safety
 * `name` must be nul-terminated; `out` must be a valid pointer.
 */
enum DupStatus dup_series_catalog(const char *name, size_t order, struct DupSeries **out);

/**
 * Reads a series from its JSON document form.
 *
 * # Safety
 * `json` must be nul-terminated; `out` must be a valid pointer.
 */
enum DupStatus dup_series_from_json(const char *json, struct DupSeries **out);

/**
 * Writes the series as pretty-printed JSON.
 *
 * # Safety
 * `series` must be a live handle; `out` must be a valid pointer.
 */
enum DupStatus dup_series_to_json(const struct DupSeries *series, char **out);

/**
 * # Safety
 * `series` must come from this library and not be freed twice.
 */
void dup_series_free(struct DupSeries *series);

/**
 * Truncation order of the series.
 *
 * # Safety
 * `series` must be a live handle; `out` must be a valid pointer.
 */
enum DupStatus dup_series_order(const struct DupSeries *series, size_t *out);

/**
 * Writes the coefficient of `tree` rendered as an exact expression in `w`.
 *
 * # Safety
 * Both handles must be live; `out` must be a valid pointer.
 */
enum DupStatus dup_series_coeff(const struct DupSeries *series,
                                const struct DupTree *tree,
                                char **out);

/**
 * The over product of two series of the same truncation order.
 *
 * # Safety
 * Both handles must be live; `out` must be a valid pointer.
 */
enum DupStatus dup_series_over(const struct DupSeries *left,
                               const struct DupSeries *right,
                               struct DupSeries **out);

/**
 * The under product of two series of the same truncation order.
 *
 * # Safety
 * Both handles must be live; `out` must be a valid pointer.
 */
enum DupStatus dup_series_under(const struct DupSeries *left,
                                const struct DupSeries *right,
                                struct DupSeries **out);

/**
 * Substitutes `inner` into `outer`; `inner` must carry the diffeo flavor.
 *
 * # Safety
 * Both handles must be live; `out` must be a valid pointer.
 */
enum DupStatus dup_series_compose(const struct DupSeries *outer,
                                  const struct DupSeries *inner,
                                  struct DupSeries **out);

/**
 * Inverts the series for the chosen product.
 *
 * # Safety
 * `series` must be a live handle; `out` must be a valid pointer.
 */
enum DupStatus dup_series_invert(const struct DupSeries *series,
                                 enum DupProduct product,
                                 struct DupSeries **out);

/**
 * Twists signs by `(-1)^(order - 1)`.
 *
 * # Safety
 * `series` must be a live handle; `out` must be a valid pointer.
 */
enum DupStatus dup_series_suspend(const struct DupSeries *series, struct DupSeries **out);

/**
 * Writes the order-sum projection as a readable polynomial in `x`.
 *
 * # Safety
 * `series` must be a live handle; `out` must be a valid pointer.
 */
enum DupStatus dup_series_project(const struct DupSeries *series, char **out);

/**
 * Builds the rotation lattice on trees with `n` internal vertices.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum DupStatus dup_lattice_build(size_t n, struct DupLattice **out);

/**
 * # Safety
 * `lattice` must come from this library and not be freed twice.
 */
void dup_lattice_free(struct DupLattice *lattice);

/**
 * Number of lattice elements.
 *
 * # Safety
 * `lattice` must be a live handle; `out` must be a valid pointer.
 */
enum DupStatus dup_lattice_size(const struct DupLattice *lattice, size_t *out);

/**
 * Whether `s <= t` in the rotation order. Both trees must be lattice
 * elements.
 *
 * # Safety
 * All handles must be live; `out` must be a valid pointer.
 */
enum DupStatus dup_lattice_leq(const struct DupLattice *lattice,
                               const struct DupTree *s,
                               const struct DupTree *t,
                               bool *out);

/**
 * Mobius value of the interval `[s, t]`; the pair must be comparable.
 *
 * # Safety
 * All handles must be live; `out` must be a valid pointer.
 */
enum DupStatus dup_lattice_mobius(const struct DupLattice *lattice,
                                  const struct DupTree *s,
                                  const struct DupTree *t,
                                  int64_t *out);

/**
 * Writes the Hasse diagram in DOT form.
 *
 * # Safety
 * `lattice` must be a live handle; `out` must be a valid pointer.
 */
enum DupStatus dup_lattice_to_dot(const struct DupLattice *lattice, char **out);

/**
 * Writes the lattice as pretty-printed JSON.
 *
 * # Safety
 * `lattice` must be a live handle; `out` must be a valid pointer.
 */
enum DupStatus dup_lattice_to_json(const struct DupLattice *lattice, char **out);

/**
 * Runs a verification suite (`"all"`, `"trees"`, `"series"`,
 * `"propositions"`, `"tamari"`, `"hopf"`, `"dyson"`). `max_order` zero
 * keeps every check at its default order. Writes whether all checks
 * passed and, when `report_json` is non-null, the full report document.
 *
 * # Safety
 * `suite` must be nul-terminated; `passed` must be a valid pointer;
 * `report_json` may be null.
 */
enum DupStatus dup_verify_run(const char *suite,
                              size_t max_order,
                              uint64_t seed,
                              bool *passed,
                              char **report_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DUPLICIAL_H */
