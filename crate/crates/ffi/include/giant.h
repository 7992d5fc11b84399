#ifndef GIANT_H
#define GIANT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GiantStatus {
  GIANT_OK = 0,
  GIANT_ERR_NULL = 1,
  GIANT_ERR_DOMAIN = 2,
  GIANT_ERR_CONFIG = 3,
  GIANT_ERR_PARSE = 4,
  GIANT_ERR_IO = 5,
  GIANT_ERR_STRUCTURE = 6,
  GIANT_ERR_DISCONNECTED = 7,
  GIANT_ERR_RUNTIME = 8,
  GIANT_ERR_UTF8 = 9,
  GIANT_ERR_PANIC = 10,
} GiantStatus;

/**
 * Opaque decomposition handle.
 */
typedef struct GiantDecomposition GiantDecomposition;

/**
 * Opaque multigraph handle.
 */
typedef struct GiantGraph GiantGraph;

typedef struct GiantSummary {
  uintptr_t core_size;
  uintptr_t stripped_cycle_count;
  uintptr_t stripped_cycle_vertex_count;
  uintptr_t kernel_vertices;
  uintptr_t kernel_edges;
  uintptr_t max_two_path;
  uintptr_t bush_size_max;
} GiantSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until
 * the next failing call on the same thread.
 */
const char *giant_last_error(void);

/**
 * Conjugate μ < 1 with μe^{−μ} = λe^{−λ}.
 */
enum GiantStatus giant_conjugate_mu(double lambda, double *out);

/**
 * Survival probability θ with θ = 1 − e^{−θλ}.
 */
enum GiantStatus giant_theta_lambda(double lambda, double *out);

/**
 * Samples `model` (e.g. "gnp", "c1_general") on `n` vertices with
 * p = (1 + eps) / n.
 */
enum GiantStatus giant_graph_sample(const char *model,
                                    uintptr_t n,
                                    double eps,
                                    uint64_t seed,
                                    struct GiantGraph **out);

/**
 * Builds a graph from `m` edges `(us[i], vs[i])`.
 */
enum GiantStatus giant_graph_from_edges(uintptr_t n,
                                        const uintptr_t *us,
                                        const uintptr_t *vs,
                                        uintptr_t m,
                                        struct GiantGraph **out);

/**
 * Reads an edge-list file.
 */
enum GiantStatus giant_graph_read(const char *path, struct GiantGraph **out);

/**
 * Writes `graph` as an edge-list file.
 */
enum GiantStatus giant_graph_write(const struct GiantGraph *graph, const char *path);

uintptr_t giant_graph_vertex_count(const struct GiantGraph *graph);

uintptr_t giant_graph_edge_count(const struct GiantGraph *graph);

/**
 * Induced subgraph on the largest component, relabelled in vertex order.
 */
enum GiantStatus giant_graph_largest_component(const struct GiantGraph *graph,
                                               struct GiantGraph **out);

/**
 * Exact diameter of a connected graph.
 */
enum GiantStatus giant_graph_diameter(const struct GiantGraph *graph, uint32_t *out);

/**
 * Releases a graph; NULL is ignored.
 */
void giant_graph_free(struct GiantGraph *graph);

/**
 * 2-core, kernel and bush decomposition of the whole graph.
 */
enum GiantStatus giant_decompose(const struct GiantGraph *graph, struct GiantDecomposition **out);

enum GiantStatus giant_decomposition_summary(const struct GiantDecomposition *d,
                                             struct GiantSummary *out);

/**
 * Copies up to `cap` kernel path lengths into `buf`; `*len` receives the
 * full count, so a call with `cap = 0` sizes the buffer.
 */
enum GiantStatus giant_decomposition_path_lengths(const struct GiantDecomposition *d,
                                                  uintptr_t *buf,
                                                  uintptr_t cap,
                                                  uintptr_t *len);

void giant_decomposition_free(struct GiantDecomposition *d);

/**
 * Λ_C of a random Poisson λ-cell on `n` vertices with phase ratio `beta`.
 */
enum GiantStatus giant_cola_lambda_c(uintptr_t n,
                                     double lambda,
                                     double beta,
                                     uint64_t seed,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GIANT_H */
