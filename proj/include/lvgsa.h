/* C interface to the lvgsa sensitivity-analysis library. */
#ifndef LVGSA_H
#define LVGSA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef LVGSA_BUILDING
#    define LVGSA_API __declspec(dllexport)
#  else
#    define LVGSA_API __declspec(dllimport)
#  endif
#else
#  define LVGSA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The non-zero values double as process exit codes. */
typedef enum lvgsa_status {
  LVGSA_OK = 0,
  LVGSA_ERR_INTERNAL = 1,
  LVGSA_ERR_CONFIG = 2,
  LVGSA_ERR_NUMERICAL = 3,
  LVGSA_ERR_PARTIAL = 4,
  LVGSA_ERR_ARGUMENT = 5
} lvgsa_status;

typedef struct lvgsa_session lvgsa_session;

LVGSA_API const char* lvgsa_version(void);

/* Message of the last failure on this thread, "" if none. Valid until the
   next call on the same thread. */
LVGSA_API const char* lvgsa_last_error(void);

/* Sessions own a parsed configuration and the outcome of the last run. */
LVGSA_API lvgsa_status lvgsa_session_from_file(const char* path, lvgsa_session** out);
LVGSA_API lvgsa_status lvgsa_session_from_string(const char* json_text, lvgsa_session** out);
LVGSA_API void lvgsa_session_destroy(lvgsa_session* session);

LVGSA_API lvgsa_status lvgsa_session_set_seed(lvgsa_session* session, uint64_t seed);
LVGSA_API lvgsa_status lvgsa_session_set_output_dir(lvgsa_session* session, const char* dir);
LVGSA_API lvgsa_status lvgsa_session_set_threads(lvgsa_session* session, unsigned threads);

/* Analyses at the configured rho values. */
LVGSA_API lvgsa_status lvgsa_run(lvgsa_session* session);
/* Analyses over a rho grid (the default grid when none is configured). */
LVGSA_API lvgsa_status lvgsa_sweep(lvgsa_session* session);
/* Population simulation; pbpk_mdz only. */
LVGSA_API lvgsa_status lvgsa_population(lvgsa_session* session);

/* Results of the last run. Strings stay valid until the next run or destroy. */
LVGSA_API const char* lvgsa_session_summary(const lvgsa_session* session);
LVGSA_API const char* lvgsa_session_error(const lvgsa_session* session);
LVGSA_API size_t lvgsa_session_file_count(const lvgsa_session* session);
LVGSA_API const char* lvgsa_session_file(const lvgsa_session* session, size_t index);
LVGSA_API double lvgsa_session_wall_time(const lvgsa_session* session);

/* Minimal-AVE latent loadings for correlation rho, |rho| < 1. */
LVGSA_API lvgsa_status lvgsa_latent_decompose(double rho, double* lambda1, double* lambda2,
                                              double* sigma1_sq, double* sigma2_sq);

/* Evaluates model1/model2/model3 at x[0..3] = (X1, X2, X3, X4). */
LVGSA_API lvgsa_status lvgsa_model_eval(const char* model, const double* x, double* y);

#ifdef __cplusplus
}
#endif

#endif
