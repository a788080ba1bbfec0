/* C API for the egotopo shared library.
 *
 * Every function returns a status code from egotopo_status; on failure a
 * thread-local message is available via egotopo_last_error(). Strings
 * returned through out-parameters are heap-allocated and must be released
 * with egotopo_string_free(). Handles are opaque and freed with their
 * matching *_close() function. Passing NULL where a path is optional selects
 * the documented default (e.g. the closed-form cosine scorer instead of a
 * trained similarity checkpoint).
 */
#ifndef EGOTOPO_H
#define EGOTOPO_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define EGOTOPO_API __declspec(dllexport)
#else
#define EGOTOPO_API __attribute__((visibility("default")))
#endif

typedef enum egotopo_status {
  EGOTOPO_OK = 0,
  EGOTOPO_ERR_USAGE = 1,    /* bad arguments or configuration */
  EGOTOPO_ERR_DATA = 2,     /* missing or malformed inputs */
  EGOTOPO_ERR_INTERNAL = 3, /* invariant violation */
} egotopo_status;

EGOTOPO_API const char* egotopo_version(void);

/* Message for the most recent failure on this thread; never NULL. */
EGOTOPO_API const char* egotopo_last_error(void);

EGOTOPO_API void egotopo_string_free(char* s);

/* Configuration ----------------------------------------------------------- */

/* Full default configuration tree as JSON. */
EGOTOPO_API int egotopo_default_config(char** out_json);

/* Deep-merge overrides into base, rejecting unknown keys. */
EGOTOPO_API int egotopo_merge_config(const char* base_json, const char* overrides_json,
                                     char** out_json);

/* Pipeline stages ---------------------------------------------------------
 * overrides_json may be NULL or "{}" for defaults. Each stage writes its
 * artifacts plus effective_config.json and files.json into out_dir. */

EGOTOPO_API int egotopo_run_synth(const char* overrides_json, const char* out_dir);

EGOTOPO_API int egotopo_run_pairs(const char* overrides_json, const char* manifest,
                                  const char* correspondences /* nullable */,
                                  const char* out_dir);

EGOTOPO_API int egotopo_run_train_sim(const char* overrides_json, const char* manifest,
                                      const char* pairs_file, const char* out_dir);

EGOTOPO_API int egotopo_run_build_graphs(const char* overrides_json,
                                         const char* manifest,
                                         const char* sim_checkpoint /* nullable */,
                                         const char* out_dir);

EGOTOPO_API int egotopo_run_link(const char* overrides_json, const char* manifest,
                                 const char* graphs_dir, const char* out_dir);

EGOTOPO_API int egotopo_run_train_affordance(const char* overrides_json,
                                             const char* manifest,
                                             const char* graphs_dir,
                                             const char* out_dir);

EGOTOPO_API int egotopo_run_eval_affordance(const char* overrides_json,
                                            const char* manifest,
                                            const char* checkpoint,
                                            const char* eval_file,
                                            const char* out_dir);

EGOTOPO_API int egotopo_run_train_anticipation(const char* overrides_json,
                                               const char* manifest,
                                               const char* sim_checkpoint /* nullable */,
                                               const char* out_dir);

EGOTOPO_API int egotopo_run_eval_anticipation(const char* overrides_json,
                                              const char* manifest,
                                              const char* checkpoint,
                                              const char* sim_checkpoint /* nullable */,
                                              const char* out_dir);

EGOTOPO_API int egotopo_run_export(const char* graph_json_path, const char* format,
                                   int undirected, const char* out_path);

/* Handles ------------------------------------------------------------------ */

typedef struct egotopo_dataset egotopo_dataset;
typedef struct egotopo_model egotopo_model;
typedef struct egotopo_graph egotopo_graph;

EGOTOPO_API int egotopo_dataset_open(const char* manifest_path, egotopo_dataset** out);
EGOTOPO_API void egotopo_dataset_close(egotopo_dataset* ds);

/* {"videos": n, "annotations": n, "dim": d, "kitchens": n, ...} */
EGOTOPO_API int egotopo_dataset_summary(const egotopo_dataset* ds, char** out_json);

EGOTOPO_API int egotopo_model_open(const char* checkpoint_path, egotopo_model** out);
EGOTOPO_API void egotopo_model_close(egotopo_model* m);
EGOTOPO_API int egotopo_model_kind(const egotopo_model* m, char** out_kind);

/* Same-zone probability for two embedding vectors under a similarity model. */
EGOTOPO_API int egotopo_sim_score(const egotopo_model* m, const float* a,
                                  const float* b, int32_t dim, double* out_score);

/* sim_model may be NULL to use the cosine scorer from the configuration. */
EGOTOPO_API int egotopo_graph_build(const egotopo_dataset* ds, const char* video_id,
                                    const egotopo_model* sim_model /* nullable */,
                                    const char* overrides_json,
                                    egotopo_graph** out);
EGOTOPO_API void egotopo_graph_close(egotopo_graph* g);
EGOTOPO_API int egotopo_graph_json(const egotopo_graph* g, char** out_json);
EGOTOPO_API int egotopo_graph_dot(const egotopo_graph* g, int undirected,
                                  char** out_dot);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* EGOTOPO_H */
