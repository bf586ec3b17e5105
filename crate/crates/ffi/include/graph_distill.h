/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef GRAPH_DISTILL_H
#define GRAPH_DISTILL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum GdStatus {
  GD_STATUS_OK = 0,
  // A required pointer argument was NULL.
  GD_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  GD_STATUS_INVALID_UTF8 = 2,
  // Bad configuration or arguments.
  GD_STATUS_USAGE = 3,
  // Malformed or inconsistent data.
  GD_STATUS_DATA = 4,
  // Failure while running (IO, untrained direction, remote call).
  GD_STATUS_RUNTIME = 5,
  // A Rust panic was caught at the boundary.
  GD_STATUS_PANIC = 6,
} GdStatus;

// A language graph.
typedef struct GdGraph GdGraph;

// A trained translation model.
typedef struct GdModel GdModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL if none.
// The pointer stays valid until the next failing call on the same thread.
const char *gd_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must come from this library and not have been freed yet.
void gd_string_free(char *s);

// Creates an empty graph. Never returns NULL.
struct GdGraph *gd_graph_new(void);

// # Safety
// `graph` must be NULL or a handle from this library not yet freed.
void gd_graph_free(struct GdGraph *graph);

// Loads a graph spec (TOML) from `path`.
//
// # Safety
// `path` must be a valid C string; `out` must point to writable storage.
enum GdStatus gd_graph_load(const char *path, struct GdGraph **out);

// # Safety
// `graph` must be a live handle and `path` a valid C string.
enum GdStatus gd_graph_save(const struct GdGraph *graph, const char *path);

// Declares a language with `mono` monolingual sentences.
//
// # Safety
// `graph` must be a live handle and `code` a valid C string.
enum GdStatus gd_graph_add_language(struct GdGraph *graph, const char *code, uint64_t mono);

// Adds or overwrites the directed edge `src -> tgt` with `count` pairs.
//
// # Safety
// `graph` must be a live handle; `src` and `tgt` valid C strings.
enum GdStatus gd_graph_add_edge(struct GdGraph *graph,
                                const char *src,
                                const char *tgt,
                                uint64_t count);

// Number of directed edges.
//
// # Safety
// `graph` must be NULL or a live handle. NULL yields 0.
size_t gd_graph_edge_count(const struct GdGraph *graph);

// Bilingual volume of `code`: sentence pairs on all incident edges.
//
// # Safety
// `graph` must be a live handle, `code` a valid C string, `out` writable.
enum GdStatus gd_graph_bilingual_volume(const struct GdGraph *graph,
                                        const char *code,
                                        uint64_t *out);

// Loads a model saved by the CLI (`initial_model.json`, `final_model.json`, ...).
//
// # Safety
// `path` must be a valid C string; `out` must point to writable storage.
enum GdStatus gd_model_load(const char *path, struct GdModel **out);

// # Safety
// `model` must be NULL or a handle from this library not yet freed.
void gd_model_free(struct GdModel *model);

// Translates one whitespace-tokenized sentence from `src` to `tgt`.
// On success `*out` holds a new string to release with [`gd_string_free`].
//
// # Safety
// `model` must be a live handle, string arguments valid C strings, `out` writable.
enum GdStatus gd_model_translate(const struct GdModel *model,
                                 const char *src,
                                 const char *tgt,
                                 const char *sentence,
                                 char **out);

// Corpus BLEU of `n` hypotheses against `n` references, in `[0, 100]`.
//
// # Safety
// `hyps` and `refs` must each point to `n` valid C strings; `out` writable.
enum GdStatus gd_bleu(const char *const *hyps, const char *const *refs, size_t n, double *out);

// Generates the synthetic data described by the experiment config at
// `config` (same as `graph-distill gen --config`).
//
// # Safety
// `config` must be a valid C string.
enum GdStatus gd_generate(const char *config);

// Runs `mode` (`initial`, `bt`, `forward`, `graph` or `compare`) on
// previously generated data, writes reports, and returns the rendered table
// in `*table` (release with [`gd_string_free`]).
//
// # Safety
// `config` and `mode` must be valid C strings; `table` writable.
enum GdStatus gd_run_experiment(const char *config, const char *mode, char **table);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPH_DISTILL_H */
