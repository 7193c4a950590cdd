/* C interface to the UAV-swarm federated learning library.
 *
 * Every object is an opaque handle owned by the caller and released with the
 * matching *_free function. Functions return a uavfl_status; on failure the
 * message is available from uavfl_last_error() on the same thread.
 * Strings returned through char** are released with uavfl_string_free.
 */
#ifndef UAVFL_UAVFL_H
#define UAVFL_UAVFL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef UAVFL_BUILDING_LIBRARY
#    define UAVFL_API __declspec(dllexport)
#  else
#    define UAVFL_API __declspec(dllimport)
#  endif
#else
#  define UAVFL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uavfl_status {
  UAVFL_OK = 0,
  UAVFL_ERR_CONFIG = 1,
  UAVFL_ERR_INFEASIBLE = 2,
  UAVFL_ERR_RUNTIME = 3,
  UAVFL_ERR_ARGUMENT = 4,
  UAVFL_ERR_IO = 5
} uavfl_status;

typedef struct uavfl_scenario uavfl_scenario;
typedef struct uavfl_design uavfl_design;
typedef struct uavfl_result uavfl_result;

UAVFL_API const char* uavfl_last_error(void);
UAVFL_API const char* uavfl_status_name(uavfl_status status);
UAVFL_API void uavfl_string_free(char* text);

/* Scenarios */
UAVFL_API uavfl_status uavfl_scenario_default(uavfl_scenario** out);
UAVFL_API uavfl_status uavfl_scenario_load(const char* path, uavfl_scenario** out);
UAVFL_API uavfl_status uavfl_scenario_from_json(const char* json, uavfl_scenario** out);
UAVFL_API uavfl_status uavfl_scenario_to_json(const uavfl_scenario* scenario, char** out);
UAVFL_API uavfl_status uavfl_scenario_n_followers(const uavfl_scenario* scenario, int* out);
UAVFL_API void uavfl_scenario_free(uavfl_scenario* scenario);

/* Designs. p has n_followers entries. */
UAVFL_API uavfl_status uavfl_design_from_scenario(const uavfl_scenario* scenario, uavfl_design** out);
UAVFL_API uavfl_status uavfl_design_get(const uavfl_design* design, double* p, size_t p_capacity, size_t* n_p,
                                        double* p_leader, double* beta, double* v);
UAVFL_API uavfl_status uavfl_design_set(uavfl_design* design, const double* p, size_t n_p, double p_leader,
                                        double beta, double v);
UAVFL_API void uavfl_design_free(uavfl_design* design);

/* Experiments. A NULL design means the scenario's design; a NULL list or zero
 * length means the scenario's list; non-positive counts mean the scenario's
 * value. */
UAVFL_API uavfl_status uavfl_validate_theorem(const uavfl_scenario* scenario, const uavfl_design* design,
                                              const double* eps, size_t n_eps, int mc_runs, uint64_t seed,
                                              uavfl_result** out);
UAVFL_API uavfl_status uavfl_sweep_sigma(const uavfl_scenario* scenario, const uavfl_design* design,
                                         const double* sigma2, size_t n_sigma2, const double* bandwidth,
                                         size_t n_bandwidth, int mc_runs, uint64_t seed, uavfl_result** out);
UAVFL_API uavfl_status uavfl_compare_designs(const uavfl_scenario* scenario, const double* bandwidth,
                                             size_t n_bandwidth, int n_baseline_draws, int samples_k,
                                             uint64_t seed, uavfl_result** out);
/* design_out may be NULL. The result also carries the dual trace. */
UAVFL_API uavfl_status uavfl_optimize(const uavfl_scenario* scenario, int samples_k, uint64_t seed,
                                      uavfl_result** out, uavfl_design** design_out);
/* epsilon <= 0 means the scenario's epsilon. */
UAVFL_API uavfl_status uavfl_simulate(const uavfl_scenario* scenario, const uavfl_design* design, int max_rounds,
                                      double epsilon, uint64_t seed, uavfl_result** out);

/* Results */
UAVFL_API uavfl_status uavfl_result_row_count(const uavfl_result* result, size_t* out);
UAVFL_API uavfl_status uavfl_result_wall_time(const uavfl_result* result, double* seconds);
UAVFL_API uavfl_status uavfl_result_to_csv(const uavfl_result* result, char** out);
UAVFL_API uavfl_status uavfl_result_write_csv(const uavfl_result* result, const char* path);
/* Header-only CSV when the result has no dual trace. */
UAVFL_API uavfl_status uavfl_result_trace_csv(const uavfl_result* result, char** out);
UAVFL_API void uavfl_result_free(uavfl_result* result);

#ifdef __cplusplus
}
#endif

#endif
