#ifndef SPOTSIM_H
#define SPOTSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef SPOTSIM_BUILDING
#    define SPOTSIM_API __declspec(dllexport)
#  else
#    define SPOTSIM_API __declspec(dllimport)
#  endif
#else
#  define SPOTSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spotsim_status {
  SPOTSIM_OK = 0,
  SPOTSIM_INVALID_ARGUMENT = 1,
  SPOTSIM_IO = 2,
  SPOTSIM_PARSE = 3,
  SPOTSIM_VALIDATION = 4,
  SPOTSIM_NOT_FOUND = 5,
  SPOTSIM_INFEASIBLE = 6,
  SPOTSIM_INTERNAL = 7
} spotsim_status;

typedef enum spotsim_payment {
  SPOTSIM_ON_DEMAND = 0,
  SPOTSIM_SPOT = 1,
  SPOTSIM_RESERVED_UPFRONT = 2
} spotsim_payment;

typedef enum spotsim_objective {
  SPOTSIM_MIN_COST = 0,
  SPOTSIM_MIN_TIME = 1
} spotsim_objective;

typedef struct spotsim_catalog spotsim_catalog;
typedef struct spotsim_diagnostics spotsim_diagnostics;
typedef struct spotsim_benchmarks spotsim_benchmarks;
typedef struct spotsim_recommendation spotsim_recommendation;
typedef struct spotsim_scenario spotsim_scenario;
typedef struct spotsim_result spotsim_result;

/* Message of the last failed call on this thread; never NULL. */
SPOTSIM_API const char* spotsim_last_error(void);
SPOTSIM_API const char* spotsim_status_string(spotsim_status status);
SPOTSIM_API const char* spotsim_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
SPOTSIM_API void spotsim_string_free(char* s);

/* catalog */
SPOTSIM_API spotsim_status spotsim_catalog_load(const char* path, spotsim_catalog** out);
SPOTSIM_API void spotsim_catalog_free(spotsim_catalog* catalog);
SPOTSIM_API spotsim_status spotsim_catalog_lookup_rate(const spotsim_catalog* catalog, const char* instance,
                                                       const char* region, spotsim_payment payment,
                                                       double* out_rate);
SPOTSIM_API size_t spotsim_catalog_instance_count(const spotsim_catalog* catalog);

/* validation diagnostics; a clean file yields count 0 */
SPOTSIM_API spotsim_status spotsim_validate_catalog_file(const char* path, spotsim_diagnostics** out);
SPOTSIM_API spotsim_status spotsim_validate_workload_file(const char* path, spotsim_diagnostics** out);
SPOTSIM_API size_t spotsim_diagnostics_count(const spotsim_diagnostics* diags);
SPOTSIM_API const char* spotsim_diagnostics_location(const spotsim_diagnostics* diags, size_t i);
SPOTSIM_API const char* spotsim_diagnostics_message(const spotsim_diagnostics* diags, size_t i);
SPOTSIM_API void spotsim_diagnostics_free(spotsim_diagnostics* diags);

/* benchmarks and recommendation */
SPOTSIM_API spotsim_status spotsim_benchmarks_load(const char* path, spotsim_benchmarks** out);
SPOTSIM_API size_t spotsim_benchmarks_count(const spotsim_benchmarks* bench);
SPOTSIM_API void spotsim_benchmarks_free(spotsim_benchmarks* bench);

/* max_runtime_h <= 0 means no limit. region NULL means "us-east-1".
   An infeasible constraint yields SPOTSIM_OK with count 0. */
SPOTSIM_API spotsim_status spotsim_recommend(const spotsim_benchmarks* bench, const spotsim_catalog* catalog,
                                             const char* system, double max_runtime_h,
                                             spotsim_objective objective, spotsim_payment payment,
                                             const char* region, spotsim_recommendation** out);
SPOTSIM_API size_t spotsim_recommendation_count(const spotsim_recommendation* rec);
SPOTSIM_API const char* spotsim_recommendation_instance(const spotsim_recommendation* rec, size_t i);
SPOTSIM_API const char* spotsim_recommendation_config(const spotsim_recommendation* rec, size_t i);
SPOTSIM_API double spotsim_recommendation_runtime_h(const spotsim_recommendation* rec, size_t i);
SPOTSIM_API double spotsim_recommendation_cost(const spotsim_recommendation* rec, size_t i);
SPOTSIM_API void spotsim_recommendation_free(spotsim_recommendation* rec);

/* Runtime of one job with the standard plan (6 ns, 80 x 50 ps, 2 fs). */
SPOTSIM_API spotsim_status spotsim_predict_runtime_h(const spotsim_benchmarks* bench, const char* system,
                                                     const char* instance, double* out_hours);

/* pure arithmetic */
SPOTSIM_API spotsim_status spotsim_pp_ratio(double ns_per_day, double price_per_hour, double* out);
SPOTSIM_API spotsim_status spotsim_parallel_efficiency(const int* n, const double* ns_per_day, size_t count,
                                                       double* out_efficiency);
SPOTSIM_API spotsim_status spotsim_cloud_cost_per_us(double rate_per_hour, double ns_per_day, double* out);
SPOTSIM_API spotsim_status spotsim_onprem_cost_per_us(double ns_per_day, double base_cost_per_us,
                                                      double overhead_per_year, double utilization, double* out);
SPOTSIM_API spotsim_status spotsim_cost_per_fe(double complex_runtime_h, double complex_rate,
                                               double ligand_runtime_h, double ligand_rate, int replicas,
                                               int directions, double* out);

/* JSON reports */
SPOTSIM_API spotsim_status spotsim_tco_report_json(double utilization, char** out_json);
SPOTSIM_API spotsim_status spotsim_bench_report_json(const spotsim_benchmarks* bench, const spotsim_catalog* catalog,
                                                     const char* region, char** out_json);
SPOTSIM_API spotsim_status spotsim_scaling_report_json(const char* scaling_csv_path, char** out_json);

/* simulation */
SPOTSIM_API spotsim_status spotsim_scenario_load(const char* path, spotsim_scenario** out);
SPOTSIM_API void spotsim_scenario_set_seed(spotsim_scenario* scenario, uint64_t seed);
SPOTSIM_API void spotsim_scenario_free(spotsim_scenario* scenario);
SPOTSIM_API spotsim_status spotsim_simulate(const spotsim_scenario* scenario, spotsim_result** out);
SPOTSIM_API spotsim_status spotsim_result_write(const spotsim_result* result, const char* out_dir, int event_log);
SPOTSIM_API spotsim_status spotsim_result_summary_json(const spotsim_result* result, char** out_json);
SPOTSIM_API double spotsim_result_makespan_s(const spotsim_result* result);
SPOTSIM_API double spotsim_result_total_cost(const spotsim_result* result);
SPOTSIM_API double spotsim_result_cost_per_ddg(const spotsim_result* result);
SPOTSIM_API int64_t spotsim_result_failed_jobs(const spotsim_result* result);
SPOTSIM_API void spotsim_result_free(spotsim_result* result);

#ifdef __cplusplus
}
#endif

#endif
