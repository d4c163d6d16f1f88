/* C interface to the qnnent engine. Link against the qnnent_ffi static or shared library. */

#ifndef QNNENT_H
#define QNNENT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirrored from the engine's error taxonomy.
 */
typedef enum QnnentStatus {
  QNNENT_STATUS_OK = 0,
  QNNENT_STATUS_INVALID_ARGUMENT = 1,
  QNNENT_STATUS_CONFIG = 2,
  QNNENT_STATUS_RESOURCE = 3,
  QNNENT_STATUS_DEGENERATE = 4,
  QNNENT_STATUS_PRECONDITION = 5,
  QNNENT_STATUS_FORMAT = 6,
  QNNENT_STATUS_IO = 7,
  QNNENT_STATUS_NULL_POINTER = 8,
} QnnentStatus;

/**
 * Opaque dense-state handle.
 */
typedef struct QnnentState QnnentState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread. Never null; empty
 * before the first failure. The pointer is invalidated by the next
 * failing call on the same thread.
 */
const char *qnnent_last_error_message(void);

/**
 * Version string of the underlying engine (static storage).
 */
const char *qnnent_version(void);

/**
 * Frees a state handle; a null handle is a no-op.
 *
 * # Safety
 * `state` must be a handle returned by this library, not yet freed.
 */
void qnnent_state_free(struct QnnentState *state);

/**
 * Number of sites of a state; 0 for a null handle.
 *
 * # Safety
 * `state` must be a live handle from this library or null.
 */
uint32_t qnnent_state_n_sites(const struct QnnentState *state);

/**
 * Reads one amplitude by basis index.
 *
 * # Safety
 * `state` must be a live handle; `re` and `im` must be writable.
 */
enum QnnentStatus qnnent_state_amplitude(const struct QnnentState *state,
                                         uint64_t index,
                                         double *re,
                                         double *im);

/**
 * Normalizes a state in place. Needed before entropy or rank queries on
 * states loaded from files that were saved unnormalized.
 *
 * # Safety
 * `state` must be a live handle from this library.
 */
enum QnnentStatus qnnent_state_normalize(struct QnnentState *state);

/**
 * Loads a `.qns` state file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum QnnentStatus qnnent_state_read(const char *path, struct QnnentState **out);

/**
 * Writes a state to a `.qns` file (atomic rename).
 *
 * # Safety
 * `state` must be a live handle and `path` a NUL-terminated string.
 */
enum QnnentStatus qnnent_state_write(const struct QnnentState *state, const char *path);

/**
 * Builds the normalized periodic cluster state on `n_sites >= 3` qubits.
 *
 * # Safety
 * `out` must be writable.
 */
enum QnnentStatus qnnent_cluster_state(uint32_t n_sites, struct QnnentState **out);

/**
 * Builds the normalized toric-code ground state of winding sector
 * `(winding_x, winding_y)` on the `l x l` torus.
 *
 * # Safety
 * `out` must be writable.
 */
enum QnnentStatus qnnent_toric_ground_state(uint32_t l,
                                            uint8_t winding_x,
                                            uint8_t winding_y,
                                            struct QnnentState **out);

/**
 * Builds a normalized graph state from an edge list given as
 * `edge_count` pairs of vertex indices.
 *
 * # Safety
 * `edges` must point to `2 * edge_count` readable u32 values; `out`
 * must be writable.
 */
enum QnnentStatus qnnent_graph_state(uint32_t n_vertices,
                                     const uint32_t *edges,
                                     uintptr_t edge_count,
                                     struct QnnentState **out);

/**
 * Rényi entropy (nats) of the reduced state on `region`, a list of
 * distinct site indices.
 *
 * # Safety
 * `state` must be a live handle, `region` must point to `region_len`
 * readable u32 values, and `out_nats` must be writable.
 */
enum QnnentStatus qnnent_renyi_entropy(const struct QnnentState *state,
                                       const uint32_t *region,
                                       uintptr_t region_len,
                                       double alpha,
                                       double *out_nats);

/**
 * Schmidt rank of the reduced state on `region` at relative tolerance
 * `rel_tol` (pass 0 to use the engine default).
 *
 * # Safety
 * Same contracts as [`qnnent_renyi_entropy`].
 */
enum QnnentStatus qnnent_schmidt_rank(const struct QnnentState *state,
                                      const uint32_t *region,
                                      uintptr_t region_len,
                                      double rel_tol,
                                      uint64_t *out_rank);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QNNENT_H */
