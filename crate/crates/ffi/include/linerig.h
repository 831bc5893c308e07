#ifndef LINERIG_H
#define LINERIG_H

#include <stddef.h>
#include <stdint.h>

typedef enum LinerigStatus {
  LINERIG_STATUS_OK = 0,
  LINERIG_STATUS_NULL_POINTER = 1,
  LINERIG_STATUS_INVALID_UTF8 = 2,
  LINERIG_STATUS_PARSE_ERROR = 3,
  LINERIG_STATUS_VERDICT_IS_NO = 4,
  LINERIG_STATUS_UNDECIDED = 5,
  LINERIG_STATUS_SAMPLING_BUDGET_EXCEEDED = 6,
  LINERIG_STATUS_INVALID_ARGUMENT = 7,
  LINERIG_STATUS_REPLAY_FAILED = 8,
  LINERIG_STATUS_INTERNAL = 9,
  LINERIG_STATUS_PANIC = 10,
} LinerigStatus;

/**
 * Opaque instance handle.
 */
typedef struct LinerigInstance LinerigInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next call on this thread.
 */
const char *linerig_last_error(void);

/**
 * Library version as a static string.
 */
const char *linerig_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void linerig_string_free(char *s);

/**
 * Parses a format-1 instance document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum LinerigStatus linerig_instance_from_json(const char *json, struct LinerigInstance **out);

/**
 * # Safety
 * `inst` must come from this library and not have been freed. Null is
 * ignored.
 */
void linerig_instance_free(struct LinerigInstance *inst);

/**
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum LinerigStatus linerig_instance_to_json(const struct LinerigInstance *inst, char **out);

/**
 * Vertex, edge and line counts. Any output pointer may be null.
 *
 * # Safety
 * `inst` must be a live handle.
 */
enum LinerigStatus linerig_instance_sizes(const struct LinerigInstance *inst,
                                          uintptr_t *vertices,
                                          uintptr_t *edges,
                                          uintptr_t *lines);

/**
 * Random instance. `ensure` is 0 for any verdict, 1 for YES, 2 for NO.
 *
 * # Safety
 * `out` must be writable.
 */
enum LinerigStatus linerig_random(uintptr_t n,
                                  uintptr_t k,
                                  uintptr_t dim,
                                  uint64_t seed,
                                  int32_t ensure,
                                  struct LinerigInstance **out);

/**
 * Full analysis report as JSON.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum LinerigStatus linerig_analyze(const struct LinerigInstance *inst, char **out);

/**
 * Writes 1 or 0 to `out`; `Undecided` when the standing assumptions fail.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum LinerigStatus linerig_is_globally_rigid(const struct LinerigInstance *inst, int32_t *out);

/**
 * Certificate of global rigidity as JSON; `VerdictIsNo` otherwise.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum LinerigStatus linerig_certify(const struct LinerigInstance *inst, char **out);

/**
 * Replays a certificate against the instance graph.
 *
 * # Safety
 * `inst` must be a live handle; `cert_json` a NUL-terminated string.
 */
enum LinerigStatus linerig_replay_certificate(const struct LinerigInstance *inst,
                                              const char *cert_json);

/**
 * Cross-check report as JSON: combinatorial rigidity against exact rank,
 * and the global verdict against `restarts` oracle restarts.
 *
 * # Safety
 * `inst` must be a live handle; `out` must be writable.
 */
enum LinerigStatus linerig_verify(const struct LinerigInstance *inst,
                                  uintptr_t restarts,
                                  uint64_t seed,
                                  char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINERIG_H */
