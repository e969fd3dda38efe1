/* Copyright 2026 The ckptopt Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of the ckptopt shared library. Objects are opaque handles
 * released with their *_free function. Functions return a ckpt_error; on
 * failure ckpt_last_error() describes the problem for the calling thread.
 * Strings returned through char** parameters are NUL-terminated and owned by
 * the caller, who releases them with ckpt_string_free().
 */
#ifndef CKPTOPT_CKPTOPT_H_
#define CKPTOPT_CKPTOPT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CKPT_API __declspec(dllexport)
#else
#define CKPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ckpt_error {
  CKPT_OK = 0,
  CKPT_E_INVALID_ARGUMENT = 1,
  CKPT_E_PARSE = 2,
  CKPT_E_VALIDATION = 3,
  CKPT_E_IO = 4,
  CKPT_E_CAP_EXCEEDED = 5,
  CKPT_E_INTERNAL = 6
} ckpt_error;

typedef enum ckpt_solve_status {
  CKPT_SOLVE_OPTIMAL = 0,
  CKPT_SOLVE_FEASIBLE_GAP = 1,
  CKPT_SOLVE_INFEASIBLE = 2,
  CKPT_SOLVE_TIMEOUT_NO_INCUMBENT = 3
} ckpt_solve_status;

typedef enum ckpt_trace_format { CKPT_TRACE_CSV = 0, CKPT_TRACE_JSON = 1 } ckpt_trace_format;

/* Graph plus its full implementation catalog. */
typedef struct ckpt_instance ckpt_instance;
/* Outcome of one solve. */
typedef struct ckpt_result ckpt_result;

typedef struct ckpt_options {
  const char* ablation;      /* none, conv, out, int or all (default all) */
  const char* bound;         /* upper (default) or tight */
  int inplace;               /* allow in-place recomputation */
  double time_limit;         /* seconds, default 60 */
  int64_t node_limit;        /* 0 = unlimited; deterministic alternative to the clock */
  double gap_target;         /* relative gap at which the search stops, default 0 */
  const char* branch_order;  /* fixed-priority (default), paper-order or most-fractional */
  int heuristics;            /* seed the search with checkpointing plans, default 1 */
  uint64_t seed;             /* recorded for reproducibility; the search is deterministic */
  int threads;               /* sweep cells solved concurrently, default 1 */
} ckpt_options;

CKPT_API const char* ckpt_version(void);
CKPT_API const char* ckpt_last_error(void);
CKPT_API void ckpt_string_free(char* s);
CKPT_API void ckpt_options_init(ckpt_options* options);

/* Parses "4096", "1.5MiB", "2GiB" etc. into bytes. */
CKPT_API ckpt_error ckpt_parse_bytes(const char* text, int64_t* bytes);

CKPT_API ckpt_error ckpt_instance_load(const char* graph_path, const char* catalog_path, ckpt_instance** out);
CKPT_API ckpt_error ckpt_instance_parse(const char* graph_json, const char* catalog_json, ckpt_instance** out);
/* kind: chain, residual, inception-toy or unet-toy. variants 0 keeps the full menu. */
CKPT_API ckpt_error ckpt_instance_generate(const char* kind, int n, uint64_t seed, int variants, int64_t unit_bytes,
                                           ckpt_instance** out);
CKPT_API ckpt_error ckpt_instance_graph_json(const ckpt_instance* inst, char** out);
CKPT_API ckpt_error ckpt_instance_catalog_json(const ckpt_instance* inst, char** out);
CKPT_API void ckpt_instance_free(ckpt_instance* inst);

/* Store-everything schedule with default implementations. */
CKPT_API ckpt_error ckpt_store_everything(const ckpt_instance* inst, const ckpt_options* options, char** schedule);

CKPT_API ckpt_error ckpt_solve(const ckpt_instance* inst, int64_t budget, const ckpt_options* options,
                               ckpt_result** out);
CKPT_API ckpt_solve_status ckpt_result_status(const ckpt_result* result);
CKPT_API const char* ckpt_result_status_name(const ckpt_result* result);
CKPT_API int ckpt_result_has_schedule(const ckpt_result* result);
CKPT_API ckpt_error ckpt_result_schedule(const ckpt_result* result, char** schedule);
/* One JSON object per line: elapsed_ms, incumbent, bound, gap. */
CKPT_API ckpt_error ckpt_result_telemetry(const ckpt_result* result, char** jsonl);
/* JSON: status, objective, lower_bound, gap, nodes, recomputations, model size. */
CKPT_API ckpt_error ckpt_result_summary(const ckpt_result* result, char** json);
CKPT_API void ckpt_result_free(ckpt_result* result);

/* Validates and executes a schedule. Returns CKPT_E_VALIDATION with one
 * violation per line in *violations when the schedule cannot run. The
 * summary JSON holds peak and total_cost. Any output pointer may be NULL. */
CKPT_API ckpt_error ckpt_simulate(const ckpt_instance* inst, const char* schedule, const ckpt_options* options,
                                  ckpt_trace_format format, char** trace, char** summary, char** violations);

CKPT_API ckpt_error ckpt_export_lp(const ckpt_instance* inst, int64_t budget, const ckpt_options* options,
                                   char** lp, char** stats_json);

/* modes: comma-separated ablation modes. *cells receives a JSON array with
 * each cell's status, objective and schedule. */
CKPT_API ckpt_error ckpt_sweep(const ckpt_instance* inst, const int64_t* budgets, size_t n_budgets,
                               const char* modes, const ckpt_options* options, char** csv, char** cells);

/* Exhaustive check of the solver against enumeration for small instances.
 * memory_rhs_delta perturbs the model's memory rows (fault injection). */
CKPT_API ckpt_error ckpt_oracle_cross_check(const ckpt_instance* inst, const int64_t* budgets, size_t n_budgets,
                                            const ckpt_options* options, int64_t memory_rhs_delta, int* all_pass,
                                            char** report);

#ifdef __cplusplus
}
#endif

#endif /* CKPTOPT_CKPTOPT_H_ */
