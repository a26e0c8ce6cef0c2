#ifndef FLBOT_H
#define FLBOT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by every fallible entry point.
 */
typedef enum {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_ARGUMENT = 1,
  FL_STATUS_INVALID_UTF8 = 2,
  FL_STATUS_INVALID_INPUT = 3,
  FL_STATUS_RESOURCE_LIMIT = 4,
  FL_STATUS_INTERNAL_DEFECT = 5,
  FL_STATUS_PANIC = 6,
} FlStatus;

/**
 * A parsed goal.
 */
typedef struct FlGoal FlGoal;

/**
 * The result of deciding a goal.
 */
typedef struct FlOutcome FlOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. The pointer stays
 * valid until the next call into the library on the same thread.
 */
const char *fl_last_error(void);

/**
 * Library version as a static string.
 */
const char *fl_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void fl_string_free(char *s);

/**
 * Parses goal text into a new handle stored in `*out`.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` a writable pointer.
 */
FlStatus fl_goal_parse(const char *text, FlGoal **out);

/**
 * # Safety
 * `goal` must be NULL or a handle from [`fl_goal_parse`] not yet freed.
 */
void fl_goal_free(FlGoal *goal);

/**
 * Canonical text of the goal, or NULL for a NULL handle.
 *
 * # Safety
 * `goal` must be NULL or a live goal handle.
 */
char *fl_goal_render(const FlGoal *goal);

/**
 * Decides unifiability. `max_branches` of 0 means no cap.
 *
 * # Safety
 * `goal` must be a live goal handle and `out` a writable pointer.
 */
FlStatus fl_unify(const FlGoal *goal, size_t max_branches, FlOutcome **out);

/**
 * # Safety
 * `outcome` must be NULL or a handle from [`fl_unify`] not yet freed.
 */
void fl_outcome_free(FlOutcome *outcome);

/**
 * 1 if unifiable, 0 if not, -1 for a NULL handle.
 *
 * # Safety
 * `outcome` must be NULL or a live outcome handle.
 */
int32_t fl_outcome_unifiable(const FlOutcome *outcome);

/**
 * The witness in substitution-file syntax, or NULL when there is none.
 *
 * # Safety
 * `outcome` must be NULL or a live outcome handle.
 */
char *fl_outcome_witness(const FlOutcome *outcome);

/**
 * Per-sub-goal diagnostics as a JSON array, or NULL for a NULL handle.
 *
 * # Safety
 * `outcome` must be NULL or a live outcome handle.
 */
char *fl_outcome_json(const FlOutcome *outcome);

/**
 * Checks a substitution, given as `X := concept` lines, against the goal.
 * Writes 1 to `*is_unifier` when it is a ground unifier and 0 otherwise.
 *
 * # Safety
 * `goal` must be a live goal handle, `subst` a nul-terminated string and
 * `is_unifier` a writable pointer.
 */
FlStatus fl_verify(const FlGoal *goal, const char *subst, int32_t *is_unifier);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLBOT_H */
