#ifndef GFOMLB_GFOMLB_H
#define GFOMLB_GFOMLB_H

#include <stdint.h>

#if defined(GFOMLB_BUILDING)
#define GFOMLB_API __attribute__((visibility("default")))
#else
#define GFOMLB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. The CLI maps them onto process exit codes. */
typedef enum gfomlb_status {
  GFOMLB_OK = 0,
  GFOMLB_ERR_CONFIG = 2,
  GFOMLB_ERR_NUMERICAL = 3,
  GFOMLB_ERR_DOMAIN = 4,
  GFOMLB_ERR_IO = 5,
  GFOMLB_ERR_INTERNAL = 6
} gfomlb_status;

typedef struct gfomlb_prior gfomlb_prior;
typedef struct gfomlb_channel gfomlb_channel;
typedef struct gfomlb_se_trace gfomlb_se_trace;
typedef struct gfomlb_experiment gfomlb_experiment;
typedef struct gfomlb_run_record gfomlb_run_record;

/* Message for the last failing call on this thread ("" if none). Valid until
 * the next call on the same thread. */
GFOMLB_API const char* gfomlb_last_error(void);
GFOMLB_API const char* gfomlb_version(void);

/* Strings returned through char** out-parameters are owned by the caller. */
GFOMLB_API void gfomlb_string_free(char* s);

/* ---- priors and channels (JSON descriptions) ---- */
GFOMLB_API gfomlb_status gfomlb_prior_from_json(const char* json, gfomlb_prior** out);
GFOMLB_API gfomlb_status gfomlb_prior_dim(const gfomlb_prior* prior, int* out);
GFOMLB_API gfomlb_status gfomlb_prior_second_moment_trace(const gfomlb_prior* prior, double* out);
GFOMLB_API void gfomlb_prior_free(gfomlb_prior* prior);

GFOMLB_API gfomlb_status gfomlb_channel_from_json(const char* json, gfomlb_channel** out);
GFOMLB_API void gfomlb_channel_free(gfomlb_channel* channel);

/* tau2 may be INFINITY. */
GFOMLB_API gfomlb_status gfomlb_mmse_scalar(const gfomlb_prior* prior, double tau2, double* out);
/* Row-major dim x dim matrices. */
GFOMLB_API gfomlb_status gfomlb_v_second_moment(const gfomlb_prior* prior, const double* q,
                                                double* out);
GFOMLB_API gfomlb_status gfomlb_score_expectation(const gfomlb_channel* channel, double sigma,
                                                  double tilde_tau, double* out);
GFOMLB_API gfomlb_status gfomlb_delta_sp(const gfomlb_channel* channel, double* out);

/* ---- state evolution ---- */
GFOMLB_API gfomlb_status gfomlb_se_regression(const gfomlb_prior* prior,
                                              const gfomlb_channel* channel, double delta,
                                              int t_max, gfomlb_se_trace** out);
GFOMLB_API gfomlb_status gfomlb_se_lowrank(const gfomlb_prior* prior_theta,
                                           const gfomlb_prior* prior_lambda, double delta,
                                           int t_max, gfomlb_se_trace** out);
GFOMLB_API gfomlb_status gfomlb_se_trace_length(const gfomlb_se_trace* trace, int* out);
/* Lower bound on the per-coordinate squared error at index t. */
GFOMLB_API gfomlb_status gfomlb_se_trace_lower_bound(const gfomlb_se_trace* trace, int t,
                                                     double* out);
GFOMLB_API gfomlb_status gfomlb_se_trace_csv(const gfomlb_se_trace* trace, char** out);
GFOMLB_API void gfomlb_se_trace_free(gfomlb_se_trace* trace);

/* ---- applications ---- */
/* CSV mu,eps,delta,alpha,t,q_t,bound for t = 0..t_max. */
GFOMLB_API gfomlb_status gfomlb_spca_bound_csv(double mu, double eps, double delta, double alpha,
                                               int t_max, char** out);
GFOMLB_API gfomlb_status gfomlb_spca_correlation_bound(double mu, double eps, double delta,
                                                       double alpha, int t, double* out);
/* CSV delta_sp,delta,eps,alpha,t,q_t,qhat_t,bound for t = 0..t_max. */
GFOMLB_API gfomlb_status gfomlb_pr_threshold_csv(const gfomlb_channel* channel, double delta,
                                                 double eps, double alpha, int t_max, char** out);

/* ---- experiments ---- */
GFOMLB_API gfomlb_status gfomlb_experiment_from_json(const char* json, gfomlb_experiment** out);
GFOMLB_API gfomlb_status gfomlb_experiment_load(const char* path, gfomlb_experiment** out);
GFOMLB_API gfomlb_status gfomlb_experiment_set_seed_count(gfomlb_experiment* exp, int count);
GFOMLB_API gfomlb_status gfomlb_experiment_hash(const gfomlb_experiment* exp, char** out);
GFOMLB_API void gfomlb_experiment_free(gfomlb_experiment* exp);

/* Single runs on the instance for `seed`; `multiplies` may be NULL. */
GFOMLB_API gfomlb_status gfomlb_amp_run_csv(const gfomlb_experiment* exp, uint64_t seed,
                                            char** out, int* multiplies);
GFOMLB_API gfomlb_status gfomlb_gfom_run_csv(const gfomlb_experiment* exp, uint64_t seed,
                                             char** out, int* multiplies);

GFOMLB_API gfomlb_status gfomlb_run_comparison(const gfomlb_experiment* exp, int jobs,
                                               gfomlb_run_record** out);
GFOMLB_API gfomlb_status gfomlb_run_record_compare_csv(const gfomlb_run_record* rec, char** out);
GFOMLB_API gfomlb_status gfomlb_run_record_summary_json(const gfomlb_run_record* rec, char** out);
GFOMLB_API gfomlb_status gfomlb_run_record_failure_count(const gfomlb_run_record* rec, int* out);
/* Worst failure kind among seeds (GFOMLB_OK when none failed). */
GFOMLB_API gfomlb_status gfomlb_run_record_failure_status(const gfomlb_run_record* rec);
/* Writes trace/compare/summary files under out_dir (NULL or "" for cwd). */
GFOMLB_API gfomlb_status gfomlb_run_record_write(const gfomlb_experiment* exp,
                                                 const gfomlb_run_record* rec,
                                                 const char* out_dir);
GFOMLB_API void gfomlb_run_record_free(gfomlb_run_record* rec);

/* Runs the built-in quick checks; report lines are "PASS name" / "FAIL name: detail". */
GFOMLB_API gfomlb_status gfomlb_selftest(char** report, int* failed);

#ifdef __cplusplus
}
#endif

#endif
