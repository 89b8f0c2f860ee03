/* C interface to the nearmiss classification and explanation library. */

#ifndef NEARMISS_H
#define NEARMISS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Allen relation between two half-open intervals, in canonical tag
 * order.
 */
typedef enum NmAllenRelation {
  NmBefore = 0,
  NmMeets = 1,
  NmOverlaps = 2,
  NmStarts = 3,
  NmDuring = 4,
  NmFinishes = 5,
  NmEquals = 6,
  NmAfter = 7,
  NmMetBy = 8,
  NmOverlappedBy = 9,
  NmStartedBy = 10,
  NmFinishedBy = 11,
  NmContains = 12,
} NmAllenRelation;

/**
 * Feature origin for explanations.
 */
typedef enum NmBasis {
  NmTrace = 0,
  NmFullBk = 1,
} NmBasis;

/**
 * Similarity metric over feature sets.
 */
typedef enum NmMetric {
  NmJaccard = 0,
  NmOverlap = 1,
} NmMetric;

/**
 * Contrast example choice.
 */
typedef enum NmMiss {
  NmNear = 0,
  NmFar = 1,
} NmMiss;

/**
 * Event representation mode.
 */
typedef enum NmMode {
  NmAttributes = 0,
  NmRelations = 1,
} NmMode;

/**
 * Status code returned by every fallible call.
 */
typedef enum NmStatus {
  NmOk = 0,
  NmNullPointer = 1,
  NmInvalidUtf8 = 2,
  NmDataError = 3,
  NmLogicError = 4,
  NmLearnError = 5,
  NmSimilarityError = 6,
  NmGenerateError = 7,
  NmUnknownTarget = 8,
  NmPanic = 9,
} NmStatus;

/**
 * Opaque parsed dataset handle.
 */
typedef struct NmDataset NmDataset;

/**
 * Opaque learned or parsed theory handle.
 */
typedef struct NmTheory NmTheory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread; owned by the
 * library, valid until the next failing call on the same thread.
 */
const char *nm_last_error_message(void);

/**
 * Frees a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `pointer` must be NULL or a string obtained from this library,
 * released at most once.
 */
void nm_string_free(char *pointer);

/**
 * Parses and validates a dataset from JSON.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid
 * out-pointer.
 */
enum NmStatus nm_dataset_parse(const char *json, struct NmDataset **out);

/**
 * Releases a dataset handle. NULL is ignored.
 *
 * # Safety
 * `dataset` must be NULL or a handle from this library, released at
 * most once.
 */
void nm_dataset_free(struct NmDataset *dataset);

/**
 * Number of sequences in the dataset.
 *
 * # Safety
 * Pointers must be valid.
 */
enum NmStatus nm_dataset_sequence_count(const struct NmDataset *dataset, uint64_t *out);

/**
 * Renders the dataset as ground facts, one per line.
 *
 * # Safety
 * Pointers must be valid; free the result with `nm_string_free`.
 */
enum NmStatus nm_dataset_export_facts(const struct NmDataset *dataset,
                                      enum NmMode mode,
                                      char **out);

/**
 * Classifies two half-open intervals.
 *
 * # Safety
 * `out` must be a valid out-pointer.
 */
enum NmStatus nm_allen_classify(uint64_t first_on,
                                uint64_t first_off,
                                uint64_t second_on,
                                uint64_t second_off,
                                enum NmAllenRelation *out);

/**
 * Learns a theory for `class` with the mode's default settings.
 *
 * # Safety
 * Pointers must be valid; free the result with `nm_theory_free`.
 */
enum NmStatus nm_learn(const struct NmDataset *dataset,
                       const char *class_,
                       enum NmMode mode,
                       struct NmTheory **out);

/**
 * Parses a theory from its text form.
 *
 * # Safety
 * Pointers must be valid; free the result with `nm_theory_free`.
 */
enum NmStatus nm_theory_parse(const char *text, struct NmTheory **out);

/**
 * Renders a theory, one clause per line.
 *
 * # Safety
 * Pointers must be valid; free the result with `nm_string_free`.
 */
enum NmStatus nm_theory_render(const struct NmTheory *theory, char **out);

/**
 * Releases a theory handle. NULL is ignored.
 *
 * # Safety
 * `theory` must be NULL or a handle from this library, released at
 * most once.
 */
void nm_theory_free(struct NmTheory *theory);

/**
 * Whether the theory covers the identified sequence, using the
 * theory's own mode via the facts built for `mode`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum NmStatus nm_theory_covers(const struct NmTheory *theory,
                               const struct NmDataset *dataset,
                               const char *sequence_id,
                               enum NmMode mode,
                               bool *out);

/**
 * Explains `target` contrastively; writes a JSON array with one
 * explanation per selected miss (empty when no near miss exists).
 *
 * # Safety
 * Pointers must be valid; free the result with `nm_string_free`.
 */
enum NmStatus nm_explain(const struct NmDataset *dataset,
                         const char *target,
                         enum NmMode mode,
                         enum NmMetric metric,
                         enum NmBasis basis,
                         enum NmMiss miss,
                         char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* NEARMISS_H */
