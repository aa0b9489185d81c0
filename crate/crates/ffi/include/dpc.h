#ifndef DPC_H
#define DPC_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Values accepted by the `kind` argument of [`dpc_points_generate`].
typedef enum {
  DPC_GEN_KIND_UNIFORM = 0,
  DPC_GEN_KIND_SIMDEN = 1,
  DPC_GEN_KIND_VARDEN = 2,
} DpcGenKind;

// Status code returned by every fallible function.
typedef enum {
  DPC_STATUS_OK = 0,
  DPC_STATUS_NULL_POINTER = 1,
  DPC_STATUS_INVALID_ARGUMENT = 2,
  DPC_STATUS_DIMENSION_MISMATCH = 3,
  DPC_STATUS_NON_FINITE = 4,
  DPC_STATUS_EMPTY_INPUT = 5,
  DPC_STATUS_UNKNOWN_STRATEGY = 6,
  DPC_STATUS_IO = 7,
  DPC_STATUS_PARSE = 8,
  DPC_STATUS_THREAD_POOL = 9,
  // An output buffer is shorter than the data to be copied.
  DPC_STATUS_BUFFER_TOO_SMALL = 10,
  // A Rust panic was caught at the boundary.
  DPC_STATUS_PANIC = 11,
} DpcStatus;

// Values accepted by the `strategy` argument of [`dpc_cluster`].
typedef enum {
  DPC_STRATEGY_PRIORITY = 0,
  DPC_STRATEGY_FENWICK = 1,
  DPC_STRATEGY_INCOMPLETE = 2,
  DPC_STRATEGY_BRUTE_FORCE = 3,
} DpcStrategy;

// The outcome of one clustering run.
typedef struct DpcClustering DpcClustering;

// An immutable point set.
typedef struct DpcPoints DpcPoints;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *dpc_version(void);

// Message describing the last failed call on this thread, or NULL if the
// last call succeeded. Valid until the next call into the library from the
// same thread.
const char *dpc_last_error_message(void);

// Static name of a status code, e.g. `"buffer_too_small"`.
const char *dpc_status_name(DpcStatus status);

// Creates a point set from `n * d` row-major coordinates, which are copied.
//
// # Safety
// `coords` must point to `n * d` readable doubles and `out` to writable
// storage for one pointer.
DpcStatus dpc_points_new(const double *coords, size_t n, size_t d, DpcPoints **out);

// Reads a CSV or binary point file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
DpcStatus dpc_points_read(const char *path, DpcPoints **out);

// Generates a synthetic set with the default cluster count and domain.
// `kind` is a [`DpcGenKind`] value.
//
// # Safety
// `out` must be writable.
DpcStatus dpc_points_generate(uint32_t kind, size_t n, size_t d, uint64_t seed, DpcPoints **out);

// New handle holding `points` without exact duplicate rows.
//
// # Safety
// `points` must be a live handle and `out` writable.
DpcStatus dpc_points_dedup(const DpcPoints *points, DpcPoints **out);

// Number of points, 0 for NULL.
//
// # Safety
// `points` must be NULL or a live handle.
size_t dpc_points_len(const DpcPoints *points);

// Dimension, 0 for NULL.
//
// # Safety
// `points` must be NULL or a live handle.
size_t dpc_points_dim(const DpcPoints *points);

// Copies the row-major coordinates into `out`, which holds `len` doubles.
//
// # Safety
// `points` must be a live handle and `out` writable for `len` doubles.
DpcStatus dpc_points_coords(const DpcPoints *points, double *out, size_t len);

// Writes the points as CSV.
//
// # Safety
// `points` must be a live handle and `path` NUL-terminated.
DpcStatus dpc_points_write(const DpcPoints *points, const char *path);

// # Safety
// `points` must be NULL or a handle not yet freed.
void dpc_points_free(DpcPoints *points);

// Clusters `points`. `strategy` is a [`DpcStrategy`] value and `threads`
// the worker count, 0 meaning one per core.
//
// # Safety
// `points` must be a live handle and `out` writable.
DpcStatus dpc_cluster(const DpcPoints *points,
                      double d_cut,
                      double rho_min,
                      double delta_min,
                      uint32_t strategy,
                      size_t threads,
                      DpcClustering **out);

// Number of clustered points, 0 for NULL.
//
// # Safety
// `c` must be NULL or a live handle.
size_t dpc_clustering_len(const DpcClustering *c);

// # Safety
// `c` must be NULL or a live handle.
size_t dpc_clustering_num_clusters(const DpcClustering *c);

// # Safety
// `c` must be NULL or a live handle.
size_t dpc_clustering_num_noise(const DpcClustering *c);

// Cluster label per point: the 1-based id of the smallest member of its
// cluster, or -1 for noise.
//
// # Safety
// `c` must be a live handle and `out` writable for `len` elements.
DpcStatus dpc_clustering_labels(const DpcClustering *c, int64_t *out, size_t len);

// Density of each point.
//
// # Safety
// `c` must be a live handle and `out` writable for `len` elements.
DpcStatus dpc_clustering_densities(const DpcClustering *c, uint64_t *out, size_t len);

// 1-based id of each point's dependent point, or -1 when it has none
// (noise and the highest-priority point).
//
// # Safety
// `c` must be a live handle and `out` writable for `len` elements.
DpcStatus dpc_clustering_dependents(const DpcClustering *c, int64_t *out, size_t len);

// Dependent distance of each point, `INFINITY` where there is no
// dependent point.
//
// # Safety
// `c` must be a live handle and `out` writable for `len` elements.
DpcStatus dpc_clustering_deltas(const DpcClustering *c, double *out, size_t len);

// 1-based center ids in ascending order; `len` must be at least
// [`dpc_clustering_num_clusters`].
//
// # Safety
// `c` must be a live handle and `out` writable for `len` elements.
DpcStatus dpc_clustering_centers(const DpcClustering *c, uint64_t *out, size_t len);

// Writes the `id,label` file.
//
// # Safety
// `c` must be a live handle and `path` NUL-terminated.
DpcStatus dpc_clustering_write_labels(const DpcClustering *c, const char *path);

// Writes the `id,rho,delta` decision graph.
//
// # Safety
// `c` must be a live handle and `path` NUL-terminated.
DpcStatus dpc_clustering_write_decision_graph(const DpcClustering *c, const char *path);

// # Safety
// `c` must be NULL or a handle not yet freed.
void dpc_clustering_free(DpcClustering *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DPC_H */
