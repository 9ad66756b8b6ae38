#ifndef HBDIFF_H
#define HBDIFF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Status codes. Non-zero codes 2 to 7 match the CLI exit codes.
typedef enum HbdStatus {
  HBD_STATUS_OK = 0,
  HBD_STATUS_NULL_POINTER = 1,
  HBD_STATUS_INVALID_INPUT = 2,
  HBD_STATUS_STRUCTURE = 3,
  HBD_STATUS_NUMERICAL = 4,
  HBD_STATUS_GENERATION = 5,
  HBD_STATUS_PARSE = 6,
  HBD_STATUS_IO = 7,
  HBD_STATUS_BUFFER_SIZE = 8,
  HBD_STATUS_PANIC = 9,
} HbdStatus;

// Opaque hb-graph handle.
typedef struct HbdGraph HbdGraph;

// Opaque handle for a graph with its vertex and hb-edge biases applied.
typedef struct HbdSystem HbdSystem;

// Message of the last failed call on this thread, or NULL. Valid until the
// next failing call on the same thread.
const char *hbd_last_error(void);

// Parses an hb-graph from its JSON text.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum HbdStatus hbd_graph_from_json(const char *json, struct HbdGraph **out);

// Reads an hb-graph file; `.csv` files are read as co-occurrence lists,
// anything else as JSON.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum HbdStatus hbd_graph_read(const char *path, struct HbdGraph **out);

// Generates a grouped random hb-graph. `config_json` may be NULL for the
// default configuration; missing fields take their defaults.
//
// # Safety
// `config_json` must be NULL or a NUL-terminated string; `out` must be valid.
enum HbdStatus hbd_graph_generate(const char *config_json, uint64_t seed, struct HbdGraph **out);

// # Safety
// `graph` must be NULL or a handle from this library that was not freed yet.
void hbd_graph_free(struct HbdGraph *graph);

// Number of vertices, or 0 for NULL.
//
// # Safety
// `graph` must be NULL or a live handle.
size_t hbd_graph_vertex_count(const struct HbdGraph *graph);

// Number of hb-edges, or 0 for NULL.
//
// # Safety
// `graph` must be NULL or a live handle.
size_t hbd_graph_hbedge_count(const struct HbdGraph *graph);

// Builds the biased system of a connected graph. Biases use the textual
// form `id`, `pow:<a>` or `exp:<a>`. The graph handle stays owned by the
// caller.
//
// # Safety
// `graph` must be a live handle, the bias strings NUL-terminated and `out` valid.
enum HbdStatus hbd_system_new(const struct HbdGraph *graph,
                              const char *bias_vertex,
                              const char *bias_hbedge,
                              struct HbdSystem **out);

// # Safety
// `system` must be NULL or a live handle.
void hbd_system_free(struct HbdSystem *system);

// Runs `iterations` full diffusion steps from the uniform vertex state.
// `alpha` (length n) receives the vertex values and `epsilon` (length p)
// the hb-edge values of the last half step.
//
// # Safety
// `system` must be a live handle; the buffers must hold the given lengths.
enum HbdStatus hbd_diffuse(const struct HbdSystem *system,
                           size_t iterations,
                           double *alpha,
                           size_t n,
                           double *epsilon,
                           size_t p);

// Stationary distributions by power iteration until the L1 change of a
// full step is at most `tol`.
//
// # Safety
// `system` must be a live handle; the buffers must hold the given lengths.
enum HbdStatus hbd_stationary(const struct HbdSystem *system,
                              double tol,
                              size_t max_iter,
                              double *pi_vertex,
                              size_t n,
                              double *pi_hbedge,
                              size_t p);

// Ranks `scores` in decreasing order. `order[r]` receives the entity at
// position `r` and `tie_group[i]` the 0-based tie group of entity `i`; either
// may be NULL.
//
// # Safety
// `scores` must hold `len` values and non-NULL outputs `len` slots.
enum HbdStatus hbd_rank(const double *scores,
                        size_t len,
                        double tie_eps,
                        size_t *order,
                        size_t *tie_group);

// Strict and large Kendall tau between the rankings induced by two score
// vectors over the same `len` entities.
//
// # Safety
// `a` and `b` must hold `len` values; the outputs must be valid pointers.
enum HbdStatus hbd_kendall_tau(const double *a,
                               const double *b,
                               size_t len,
                               double tie_eps,
                               double *tau_strict,
                               double *tau_large);

#endif  /* HBDIFF_H */
