/* C interface to the flag curvature library.
 *
 * Every function returns an fc_status; on failure fc_last_error() describes
 * the error of the calling thread. Strings returned through char** outputs
 * are owned by the caller and released with fc_string_free. */
#ifndef FLAGCURV_H
#define FLAGCURV_H

#include <stdint.h>

#if defined(FLAGCURV_BUILDING)
#define FC_API __attribute__((visibility("default")))
#else
#define FC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fc_status {
  FC_OK = 0,
  FC_ERR_PARAMETER = 1,
  FC_ERR_STRUCTURE = 2,
  FC_ERR_DECOMPOSITION = 3,
  FC_ERR_CONVEXITY = 4,
  FC_ERR_DOMAIN = 5,
  FC_ERR_PRECONDITION = 6,
  FC_ERR_NUMERICAL = 7,
  FC_ERR_IO = 8,
  FC_ERR_INTERNAL = 9
} fc_status;

typedef struct fc_space fc_space;
typedef struct fc_metric fc_metric;

FC_API const char* fc_version(void);
FC_API const char* fc_last_error(void);
FC_API const char* fc_status_name(fc_status status);
FC_API void fc_string_free(char* s);

/* Shipped catalog and default configuration as JSON. */
FC_API fc_status fc_catalog_json(char** out);
FC_API fc_status fc_defaults_json(char** out);
/* Overlays a JSON config (may be NULL or "{}") on the defaults, validates it
 * and returns the complete config. */
FC_API fc_status fc_config_resolve(const char* config_json, char** out);

/* spec: catalog name, bundle:<factors>@<c>, inline JSON object or JSON file. */
FC_API fc_status fc_space_open(const char* spec, fc_space** out);
FC_API void fc_space_free(fc_space* space);
FC_API int fc_space_dim_m(const fc_space* space);
/* format: "json" or "text". */
FC_API fc_status fc_space_describe(const fc_space* space, const char* format, char** out);

/* Builds the metric of a complete or partial JSON config on the space. */
FC_API fc_status fc_metric_build(const fc_space* space, const char* config_json, fc_metric** out);
FC_API void fc_metric_free(fc_metric* metric);
FC_API int fc_metric_dim(const fc_metric* metric);
FC_API fc_status fc_metric_info(const fc_metric* metric, char** out);
FC_API fc_status fc_metric_norm(const fc_metric* metric, const double* y, int n, double* value);

/* Flag curvature K(pole, pole^wing); vectors hold n = dim m frame coordinates. */
FC_API fc_status fc_flag_curvature(const fc_metric* metric, const double* pole, const double* wing, int n,
                                   double* value);
/* JSON report with diagnostics. */
FC_API fc_status fc_curvature_report(const fc_metric* metric, const double* pole, const double* wing, int n,
                                     char** out);

/* Positivity scan with the metric's configuration. format: json, text or csv.
 * *verified is 1 when the scan verified every plane with min >= -threshold. */
FC_API fc_status fc_check_fp(const fc_metric* metric, const char* format, char** out, int* verified);

/* spec: A(p,q), C(n), D(n), Q(n), E6, E7, a product F1+F2+...@c1,c2,... or
 * "table" for the standard list of irreducible cases. format: json or text. */
FC_API fc_status fc_criterion(const char* spec, int threads, const char* format, char** out);

/* tags: comma-separated subset of algebra, oracle, navigation, fp-scan,
 * glued, criterion, determinism; NULL or "" selects all. *acceptable is 1
 * when every failure is a known deviation; *all_pass is 1 when none fails. */
FC_API fc_status fc_reproduce(const char* tags, uint64_t seed, int threads, const char* format, char** out,
                              int* acceptable, int* all_pass);

#ifdef __cplusplus
}
#endif

#endif
