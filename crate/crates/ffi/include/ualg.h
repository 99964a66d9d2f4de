#ifndef UALG_H
#define UALG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum UalgStatus {
  UalgStatus_Ok = 0,
  /**
   * Malformed input text; details via `ualg_last_error_message`.
   */
  UalgStatus_ParseError = 1,
  /**
   * Structurally valid input that violates a contract (wrong variety,
   * not a builtin, argument out of range).
   */
  UalgStatus_Invalid = 2,
  /**
   * An internal cap was exceeded; rerun with a larger budget.
   */
  UalgStatus_BudgetExceeded = 3,
  /**
   * A required pointer argument was null.
   */
  UalgStatus_NullPointer = 4,
} UalgStatus;

/**
 * An opaque finite-algebra handle, bound to the signature it was parsed
 * against.
 */
typedef struct UalgAlgebra UalgAlgebra;

/**
 * An opaque variety handle: the parsed specification plus builtin support
 * when the spec matches one of the embedded varieties.
 */
typedef struct UalgVariety UalgVariety;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; do not free.
 */
const char *ualg_version(void);

/**
 * Detail message of the last error on this thread, or null. Free with
 * [`ualg_string_free`].
 */
char *ualg_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a `ualg_*` function, not
 * yet freed, or null.
 */
void ualg_string_free(char *s);

/**
 * Parses a variety file into a handle.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be a valid
 * pointer. On success `*out` owns the handle until `ualg_variety_free`.
 */
enum UalgStatus ualg_variety_parse(const char *text, struct UalgVariety **out);

/**
 * Loads a builtin variety (`act` or `automaton`) into a handle.
 *
 * # Safety
 * `name` must be a valid NUL-terminated string; `out` must be valid.
 */
enum UalgStatus ualg_variety_builtin(const char *name, struct UalgVariety **out);

/**
 * # Safety
 * `v` must come from `ualg_variety_parse`/`ualg_variety_builtin` and not
 * have been freed; null is ignored.
 */
void ualg_variety_free(struct UalgVariety *v);

/**
 * Parses an algebra file against the variety's signature.
 *
 * # Safety
 * `variety` must be a live handle; `text` a valid string; `out` valid.
 */
enum UalgStatus ualg_algebra_parse(const struct UalgVariety *variety,
                                   const char *text,
                                   struct UalgAlgebra **out);

/**
 * # Safety
 * `a` must come from `ualg_algebra_parse` and not have been freed; null is
 * ignored.
 */
void ualg_algebra_free(struct UalgAlgebra *a);

/**
 * Writes whether the algebra satisfies every identity of the variety.
 *
 * # Safety
 * Both handles must be live; `out` must be valid.
 */
enum UalgStatus ualg_algebra_in_variety(const struct UalgVariety *variety,
                                        const struct UalgAlgebra *algebra,
                                        bool *out);

/**
 * Counts the homomorphisms between two algebras over the same signature.
 *
 * # Safety
 * All handles must be live; `out` must be valid.
 */
enum UalgStatus ualg_hom_count(const struct UalgVariety *variety,
                               const struct UalgAlgebra *from,
                               const struct UalgAlgebra *to,
                               uint64_t budget,
                               uintptr_t *out);

/**
 * Decides membership of `query` (a `lhs = rhs` line) in the algebraic
 * closure of the equation system over the algebra.
 *
 * # Safety
 * Handles must be live; `system_text` and `query` must be valid strings;
 * `out` must be valid.
 */
enum UalgStatus ualg_closure_member(const struct UalgVariety *variety,
                                    const struct UalgAlgebra *algebra,
                                    const char *system_text,
                                    const char *query,
                                    bool *out);

/**
 * Decides geometric equivalence up to the generator bound and returns the
 * verdict as a JSON string (free with [`ualg_string_free`]).
 *
 * # Safety
 * Handles must be live; `out_json` must be valid.
 */
enum UalgStatus ualg_geom_equivalent(const struct UalgVariety *variety,
                                     const struct UalgAlgebra *first,
                                     const struct UalgAlgebra *second,
                                     uintptr_t max_generators,
                                     char **out_json);

/**
 * Runs the word-system classification for a builtin variety and returns
 * the report as JSON (free with [`ualg_string_free`]).
 *
 * # Safety
 * `variety` must be live; `out_json` must be valid.
 */
enum UalgStatus ualg_search_words(const struct UalgVariety *variety,
                                  uintptr_t max_word_size,
                                  char **out_json);

/**
 * Decides automorphic equivalence up to bounds for a builtin variety and
 * returns the verdict as JSON (free with [`ualg_string_free`]).
 *
 * # Safety
 * Handles must be live; `out_json` must be valid.
 */
enum UalgStatus ualg_auto_equivalent(const struct UalgVariety *variety,
                                     const struct UalgAlgebra *first,
                                     const struct UalgAlgebra *second,
                                     uintptr_t max_word_size,
                                     uintptr_t max_generators,
                                     char **out_json);

/**
 * Materializes the derived algebra under a word system (`op := term`
 * lines) and returns its text format (free with [`ualg_string_free`]).
 *
 * # Safety
 * Handles must be live; `words_text` must be a valid string; `out_text`
 * must be valid.
 */
enum UalgStatus ualg_derive(const struct UalgVariety *variety,
                            const struct UalgAlgebra *algebra,
                            const char *words_text,
                            char **out_text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UALG_H */
