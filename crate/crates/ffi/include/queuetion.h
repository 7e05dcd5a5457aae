#ifndef QUEUETION_H
#define QUEUETION_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every function.
typedef enum QtStatus {
  QT_STATUS_OK = 0,
  QT_STATUS_NULL_POINTER = 1,
  // Malformed JSON or text that is not valid UTF-8.
  QT_STATUS_PARSE = 2,
  // Parameters or bids that fail validation.
  QT_STATUS_INVALID = 3,
  // Internal inconsistency or a panic caught at the boundary.
  QT_STATUS_INTERNAL = 4,
  // Instance too large for the requested computation.
  QT_STATUS_SIZE_LIMIT = 5,
  // An output buffer is shorter than the instance.
  QT_STATUS_BUFFER_TOO_SMALL = 6,
} QtStatus;

typedef enum QtMechanism {
  QT_MECHANISM_VCG = 0,
  QT_MECHANISM_GSP = 1,
} QtMechanism;

// Opaque instance handle.
typedef struct QtInstance QtInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Build an instance from service times `t` and values of time `w`; ids are
// `P1..Pn`.
//
// # Safety
// `t` and `w` must point to `n` readable doubles; `out` must be writable.
enum QtStatus qt_instance_new(const double *t, const double *w, size_t n, struct QtInstance **out);

// Build an instance from instance-file JSON. Exact arithmetic is used when
// every number in the document is exact.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum QtStatus qt_instance_from_json(const char *json, struct QtInstance **out);

// # Safety
// `inst` must come from a constructor in this library and not be used
// afterwards. Null is ignored.
void qt_instance_free(struct QtInstance *inst);

// # Safety
// `inst` must be a live handle; `out` must be writable.
enum QtStatus qt_instance_len(const struct QtInstance *inst, size_t *out);

// Write the efficient order (participant indices, front first) to `order`.
//
// # Safety
// `inst` must be a live handle; `order` must hold `cap` writable entries.
enum QtStatus qt_smith_order(const struct QtInstance *inst, size_t *order, size_t cap);

// Total weighted waiting time of `order`.
//
// # Safety
// `inst` must be a live handle; `order` must hold `n` entries; `out` must
// be writable.
enum QtStatus qt_total_weighted_waiting(const struct QtInstance *inst,
                                        const size_t *order,
                                        size_t n,
                                        double *out);

// Run a mechanism. `bids[i]` is participant `i`'s bid; `payments[i]`
// receives their payment. Ties are broken by lower index.
//
// # Safety
// `inst` must be a live handle; `bids` must hold `n` entries, `payments`
// `n` writable entries (or be null), `revenue` must be writable or null.
enum QtStatus qt_run(const struct QtInstance *inst,
                     enum QtMechanism mechanism,
                     const double *bids,
                     size_t n,
                     double *payments,
                     double *revenue);

// Whether the bids form a Nash equilibrium under the index tie-break.
//
// # Safety
// `inst` must be a live handle; `bids` must hold `n` entries; `out` must be
// writable.
enum QtStatus qt_is_equilibrium(const struct QtInstance *inst,
                                enum QtMechanism mechanism,
                                const double *bids,
                                size_t n,
                                bool *out);

// Lower and upper equilibrium revenue bounds. The GSP lower bound is
// exhaustive and fails with `SizeLimit` on large instances.
//
// # Safety
// `inst` must be a live handle; `lower` and `upper` must be writable.
enum QtStatus qt_revenue_bounds(const struct QtInstance *inst,
                                enum QtMechanism mechanism,
                                double *lower,
                                double *upper);

// Bounds report as JSON, with witnesses, in the same shape as the command
// line `bounds` output. Exact instances report exact values. Release the
// string with [`qt_string_free`].
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum QtStatus qt_revenue_bounds_json(const struct QtInstance *inst,
                                     enum QtMechanism mechanism,
                                     char **out);

// # Safety
// `s` must come from this library and not be used afterwards. Null is
// ignored.
void qt_string_free(char *s);

// Message for the last failure on this thread, or null if the last call
// succeeded. The pointer stays valid until the next call on this thread.
const char *qt_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUEUETION_H */
