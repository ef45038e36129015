/* C interface to the relpick data-pruning engine.
 *
 * All objects are opaque handles created by a *_load / *_create / *_build
 * function and released with the matching *_free. Every fallible call
 * returns a relpick_status; on failure relpick_last_error() describes the
 * problem for the calling thread. Output handles are only written on
 * success. Strings returned through `char**` must be released with
 * relpick_string_free().
 */
#ifndef RELPICK_RELPICK_H
#define RELPICK_RELPICK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RELPICK_BUILDING_LIBRARY)
#    define RELPICK_API __declspec(dllexport)
#  else
#    define RELPICK_API __declspec(dllimport)
#  endif
#else
#  define RELPICK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values match the CLI exit codes. */
typedef enum relpick_status {
  RELPICK_OK = 0,
  RELPICK_ERR_INTERNAL = 1,
  RELPICK_ERR_CONFIG = 2,
  RELPICK_ERR_DATA = 3,
  RELPICK_ERR_SIZE_GUARD = 4
} relpick_status;

typedef enum relpick_format { RELPICK_FORMAT_BINARY = 0, RELPICK_FORMAT_CSV = 1 } relpick_format;
typedef enum relpick_metric { RELPICK_METRIC_MAXPROB = 0, RELPICK_METRIC_DIFFPROB = 1 } relpick_metric;
typedef enum relpick_utility_kind {
  RELPICK_UTILITY_TANH = 0,
  RELPICK_UTILITY_IDENTITY = 1,
  RELPICK_UTILITY_PIECEWISE = 2
} relpick_utility_kind;
typedef enum relpick_rule {
  RELPICK_RULE_SURROGATE = 0,
  RELPICK_RULE_EXACT = 1,
  RELPICK_RULE_LAZY = 2
} relpick_rule;

typedef struct relpick_embeddings relpick_embeddings;
typedef struct relpick_confidences relpick_confidences;
typedef struct relpick_probabilities relpick_probabilities;
typedef struct relpick_labels relpick_labels;
typedef struct relpick_noise_flags relpick_noise_flags;
typedef struct relpick_graph relpick_graph;
typedef struct relpick_result relpick_result;

/* Utility description. `knots` holds 2*knot_count values (z0, y0, z1, y1, ...)
 * and is only read for RELPICK_UTILITY_PIECEWISE. */
typedef struct relpick_utility {
  relpick_utility_kind kind;
  const double* knots;
  size_t knot_count;
} relpick_utility;

typedef struct relpick_config {
  size_t budget;
  double tau;
  relpick_utility utility;
  relpick_rule rule;
  int balanced;
  uint64_t seed;
} relpick_config;

typedef struct relpick_degree_stats {
  size_t min;
  double mean;
  size_t max;
} relpick_degree_stats;

RELPICK_API const char* relpick_last_error(void);
RELPICK_API const char* relpick_version(void);
RELPICK_API void relpick_string_free(char* s);

/* Worker count for graph construction; 0 restores the default (1). */
RELPICK_API void relpick_set_threads(unsigned threads);

/* --- embeddings ------------------------------------------------------- */

/* `average_groups` = 0 disables averaging; k > 0 averages each run of k
 * consecutive rows and L2-normalizes the result. */
RELPICK_API relpick_status relpick_embeddings_load(const char* path, relpick_format format, size_t average_groups,
                                                   relpick_embeddings** out);
RELPICK_API relpick_status relpick_embeddings_create(size_t rows, size_t cols, const float* data,
                                                     relpick_embeddings** out);
RELPICK_API relpick_status relpick_embeddings_save(const relpick_embeddings* e, const char* path, relpick_format format);
RELPICK_API size_t relpick_embeddings_rows(const relpick_embeddings* e);
RELPICK_API size_t relpick_embeddings_cols(const relpick_embeddings* e);
RELPICK_API const float* relpick_embeddings_data(const relpick_embeddings* e);
RELPICK_API void relpick_embeddings_free(relpick_embeddings* e);

/* --- confidences, probabilities, labels, noise flags ------------------ */

RELPICK_API relpick_status relpick_confidences_load(const char* path, relpick_confidences** out);
RELPICK_API relpick_status relpick_confidences_create(size_t n, const float* values, relpick_confidences** out);
RELPICK_API relpick_status relpick_confidences_from_probabilities(const relpick_probabilities* p, relpick_metric metric,
                                                                  relpick_confidences** out);
RELPICK_API relpick_status relpick_confidences_save(const relpick_confidences* c, const char* path);
RELPICK_API size_t relpick_confidences_size(const relpick_confidences* c);
RELPICK_API const float* relpick_confidences_data(const relpick_confidences* c);
RELPICK_API void relpick_confidences_free(relpick_confidences* c);

RELPICK_API relpick_status relpick_probabilities_load(const char* path, relpick_probabilities** out);
RELPICK_API relpick_status relpick_probabilities_create(size_t rows, size_t cols, const float* data,
                                                        relpick_probabilities** out);
RELPICK_API size_t relpick_probabilities_rows(const relpick_probabilities* p);
RELPICK_API void relpick_probabilities_free(relpick_probabilities* p);

/* `class_count` = 0 infers the class count as max label + 1. */
RELPICK_API relpick_status relpick_labels_load(const char* path, uint32_t class_count, relpick_labels** out);
RELPICK_API relpick_status relpick_labels_create(size_t n, const uint32_t* values, uint32_t class_count,
                                                 relpick_labels** out);
RELPICK_API size_t relpick_labels_size(const relpick_labels* l);
RELPICK_API uint32_t relpick_labels_class_count(const relpick_labels* l);
RELPICK_API const uint32_t* relpick_labels_data(const relpick_labels* l);
RELPICK_API void relpick_labels_free(relpick_labels* l);

RELPICK_API relpick_status relpick_noise_flags_load(const char* path, relpick_noise_flags** out);
RELPICK_API relpick_status relpick_noise_flags_create(size_t n, const uint8_t* values, relpick_noise_flags** out);
RELPICK_API size_t relpick_noise_flags_size(const relpick_noise_flags* f);
RELPICK_API const uint8_t* relpick_noise_flags_data(const relpick_noise_flags* f);
RELPICK_API void relpick_noise_flags_free(relpick_noise_flags* f);

/* --- neighbor graph --------------------------------------------------- */

RELPICK_API relpick_status relpick_graph_build(const relpick_embeddings* e, double tau, relpick_graph** out);
RELPICK_API relpick_status relpick_graph_load(const char* path, relpick_graph** out);
RELPICK_API relpick_status relpick_graph_save(const relpick_graph* g, const char* path);
RELPICK_API size_t relpick_graph_size(const relpick_graph* g);
RELPICK_API double relpick_graph_tau(const relpick_graph* g);
RELPICK_API size_t relpick_graph_edge_count(const relpick_graph* g);
RELPICK_API relpick_status relpick_graph_degree_stats(const relpick_graph* g, relpick_degree_stats* out);
RELPICK_API void relpick_graph_free(relpick_graph* g);

/* --- selection -------------------------------------------------------- */

RELPICK_API relpick_config relpick_config_default(void);

/* `labels` may be NULL unless config->balanced is set. */
RELPICK_API relpick_status relpick_select(const relpick_graph* g, const relpick_confidences* c,
                                          const relpick_labels* labels, const relpick_config* config,
                                          relpick_result** out);

/* Selection that computes neighbor rows from the embeddings on demand
 * instead of a stored graph; O(m d) memory-light steps. Same results as
 * relpick_select on the graph built with config->tau. */
RELPICK_API relpick_status relpick_select_dense(const relpick_embeddings* e, const relpick_confidences* c,
                                                const relpick_labels* labels, const relpick_config* config,
                                                relpick_result** out);

RELPICK_API size_t relpick_result_size(const relpick_result* r);
RELPICK_API const size_t* relpick_result_order(const relpick_result* r);
RELPICK_API const double* relpick_result_gains(const relpick_result* r);
RELPICK_API const double* relpick_result_objective_trace(const relpick_result* r);
RELPICK_API const double* relpick_result_step_seconds(const relpick_result* r);
RELPICK_API size_t relpick_result_warning_count(const relpick_result* r);
/* JSON report (schema 1). With mask_timings != 0 all timings are written as 0. */
RELPICK_API relpick_status relpick_result_to_json(const relpick_result* r, int mask_timings, char** json);
RELPICK_API void relpick_result_free(relpick_result* r);

/* Objective of an arbitrary subset. */
RELPICK_API relpick_status relpick_objective(const relpick_graph* g, const relpick_confidences* c,
                                             const size_t* subset, size_t subset_size, const relpick_utility* utility,
                                             double* out);

/* Subset diagnostics as JSON: objective, coverage, neighborhood-confidence
 * summary, and the noise ratio when `flags` is non-NULL. */
RELPICK_API relpick_status relpick_evaluate_subset(const relpick_graph* g, const relpick_confidences* c,
                                                   const size_t* subset, size_t subset_size,
                                                   const relpick_utility* utility, const relpick_noise_flags* flags,
                                                   char** json);

/* --- brute-force reference -------------------------------------------- */

/* Writes the optimal subset (ascending, `s` entries) into `subset_out` and
 * its objective into `objective_out`. RELPICK_ERR_SIZE_GUARD when the
 * enumeration would exceed one million subsets. */
RELPICK_API relpick_status relpick_oracle_optimum(const relpick_graph* g, const relpick_confidences* c, size_t s,
                                                  const relpick_utility* utility, size_t* subset_out,
                                                  double* objective_out);

RELPICK_API relpick_status relpick_oracle_naive_objective(const relpick_embeddings* e, const relpick_confidences* c,
                                                          double tau, const size_t* subset, size_t subset_size,
                                                          const relpick_utility* utility, double* out);

/* Synthetic clustered instance; any output pointer may be NULL. */
RELPICK_API relpick_status relpick_random_instance(uint64_t seed, size_t m, size_t d, uint32_t classes,
                                                   double cluster_spread, double noise_fraction,
                                                   relpick_embeddings** embeddings, relpick_confidences** confidences,
                                                   relpick_labels** labels, relpick_noise_flags** noise);

/* --- baselines -------------------------------------------------------- */

/* Each writes `s` indices into `out`. */
RELPICK_API relpick_status relpick_baseline_uniform(size_t m, size_t s, uint64_t seed, size_t* out);
RELPICK_API relpick_status relpick_baseline_small_loss(const relpick_confidences* c, size_t s, size_t* out);
RELPICK_API relpick_status relpick_baseline_margin(const relpick_probabilities* p, size_t s, size_t* out);
/* `step_seconds` may be NULL; otherwise it receives `s` per-step durations. */
RELPICK_API relpick_status relpick_baseline_kcenter(const relpick_embeddings* e, size_t s, size_t seed_index,
                                                    size_t* out, double* step_seconds);

#ifdef __cplusplus
}
#endif

#endif /* RELPICK_RELPICK_H */
