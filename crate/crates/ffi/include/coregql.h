#ifndef COREGQL_H
#define COREGQL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CoregqlStatus {
  COREGQL_STATUS_OK = 0,
  COREGQL_STATUS_NULL_ARGUMENT = 1,
  COREGQL_STATUS_INVALID_UTF8 = 2,
  COREGQL_STATUS_INVALID_GRAPH = 3,
  COREGQL_STATUS_INVALID_QUERY = 4,
  COREGQL_STATUS_EVAL_ERROR = 5,
  COREGQL_STATUS_NOT_BOOLEAN = 6,
  COREGQL_STATUS_PANIC = 7,
} CoregqlStatus;

// A loaded property graph.
typedef struct CoregqlGraph CoregqlGraph;

// A query result with its CSV and JSON renderings.
typedef struct CoregqlResult CoregqlResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Why the most recent call on this thread failed; empty after a success.
// Valid until the next call into this library on the same thread.
const char *coregql_last_error(void);

// Parses a graph from its JSON document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum CoregqlStatus coregql_graph_from_json(const char *json, struct CoregqlGraph **out);

// # Safety
// `g` must be null or a live handle from [`coregql_graph_from_json`].
uintptr_t coregql_graph_node_count(const struct CoregqlGraph *g);

// # Safety
// `g` must be null or a live handle from [`coregql_graph_from_json`].
uintptr_t coregql_graph_edge_count(const struct CoregqlGraph *g);

// # Safety
// `g` must be null or a handle from [`coregql_graph_from_json`] that has
// not been freed.
void coregql_graph_free(struct CoregqlGraph *g);

// Evaluates a query file over `g`.
//
// # Safety
// `g` must be a live graph handle, `query` a NUL-terminated string and
// `out` a writable pointer.
enum CoregqlStatus coregql_eval(const struct CoregqlGraph *g,
                                const char *query,
                                struct CoregqlResult **out);

// # Safety
// `r` must be null or a live result handle.
uintptr_t coregql_result_row_count(const struct CoregqlResult *r);

// # Safety
// `r` must be null or a live result handle.
uintptr_t coregql_result_column_count(const struct CoregqlResult *r);

// The result as CSV with a header line. Owned by the result handle.
//
// # Safety
// `r` must be null or a live result handle.
const char *coregql_result_csv(const struct CoregqlResult *r);

// The result as JSON. Owned by the result handle.
//
// # Safety
// `r` must be null or a live result handle.
const char *coregql_result_json(const struct CoregqlResult *r);

// # Safety
// `r` must be null or a result handle that has not been freed.
void coregql_result_free(struct CoregqlResult *r);

// Runs a Datalog program whose `.out` relation is nullary.
//
// # Safety
// `g` must be a live graph handle, `program` a NUL-terminated string and
// `out` a writable pointer.
enum CoregqlStatus coregql_datalog_boolean(const struct CoregqlGraph *g,
                                           const char *program,
                                           bool *out);

// Runs a Datalog program and returns the `.out` relation, one
// comma-separated row per line. Release with [`coregql_string_free`].
//
// # Safety
// `g` must be a live graph handle, `program` a NUL-terminated string and
// `out` a writable pointer.
enum CoregqlStatus coregql_datalog_rows(const struct CoregqlGraph *g,
                                        const char *program,
                                        char **out);

// # Safety
// `s` must be null or a string returned by this library for the caller
// to release, not yet freed.
void coregql_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COREGQL_H */
