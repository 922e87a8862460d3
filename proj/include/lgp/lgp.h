/* C interface to the latent Gaussian process trial library.
 *
 * All functions return lgp_status; on any non-LGP_OK status the message is
 * available from lgp_last_error() (thread-local). Objects returned through
 * out-parameters are owned by the caller and released with the matching
 * *_free function.
 */
#ifndef LGP_LGP_H
#define LGP_LGP_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lgp_status {
  LGP_OK = 0,
  LGP_ERR_INVALID_ARGUMENT = 1,
  LGP_ERR_VALIDATION = 2,
  LGP_ERR_NUMERICAL = 3,
  LGP_ERR_IO = 4,
  LGP_ERR_INTERNAL = 5
} lgp_status;

const char* lgp_version(void);
const char* lgp_last_error(void);

typedef struct lgp_dataset lgp_dataset;
typedef struct lgp_draws lgp_draws;

/* ------------------------------------------------------------------ data */

/* CSV format: header `arm,patient_id,week,outcome`, one row per observation. */
lgp_status lgp_dataset_load(const char* csv_path, int horizon_weeks,
                            lgp_dataset** out);
lgp_status lgp_dataset_save(const lgp_dataset* ds, const char* csv_path);
void lgp_dataset_free(lgp_dataset* ds);
int lgp_dataset_patient_count(const lgp_dataset* ds);
int lgp_dataset_arm_patient_count(const lgp_dataset* ds, int arm);
int lgp_dataset_horizon_weeks(const lgp_dataset* ds);

/* --------------------------------------------------------------- configs */

typedef struct lgp_prior_config {
  int max_degree;              /* M, default 5 */
  double beta_prior_mean;      /* mu_0, default 0 */
  double beta_prior_var;       /* sigma_0^2, default 100 */
  double theta_prior_mean[3];  /* (theta1, r, theta2), default 0 */
  double theta_prior_var[3];   /* default 100 */
  double threshold;            /* a_h, default 0 */
} lgp_prior_config;

typedef struct lgp_mcmc_config {
  long iterations; /* default 10000 */
  long burn_in;    /* default 2000 */
  int thin;        /* default 10 */
  int hmc_steps;   /* leapfrog count, default 20 */
  double hmc_eps;  /* initial stepsize, default 0.01, adapted in burn-in */
  int adapt_eps;   /* default 1 */
  unsigned long long seed;
} lgp_mcmc_config;

typedef struct lgp_monitor_config {
  double delta_weeks; /* superiority margin, default 2 */
  double xi_upper;    /* default 0.95 */
  double xi_lower;    /* default 0.05 */
} lgp_monitor_config;

void lgp_prior_config_init(lgp_prior_config* cfg);
void lgp_mcmc_config_init(lgp_mcmc_config* cfg);
void lgp_monitor_config_init(lgp_monitor_config* cfg);

/* --------------------------------------------------------------- fitting */

lgp_status lgp_fit(const lgp_dataset* ds, const lgp_prior_config* prior,
                   const lgp_mcmc_config* mcmc, lgp_draws** out);
void lgp_draws_free(lgp_draws* draws);
long lgp_draws_count(const lgp_draws* draws);
double lgp_draws_hmc_acceptance(const lgp_draws* draws);

/* `arm,param,mean,sd,lo95,hi95` rows incl. m proportions and DDR per arm. */
lgp_status lgp_draws_write_summary_csv(const lgp_draws* draws, const char* path);
/* `iter,param,value` long-format trace of retained draws. */
lgp_status lgp_draws_write_trace_csv(const lgp_draws* draws, const char* path);
/* `param,ess,constant` effective-sample-size diagnostics. */
lgp_status lgp_draws_write_diagnostics_csv(const lgp_draws* draws,
                                           const char* path);
/* `param,lag,value` autocorrelations up to lag 50. */
lgp_status lgp_draws_write_autocorr_csv(const lgp_draws* draws,
                                        const char* path);
/* `draw,week,value,kind` latent realizations for one patient. */
lgp_status lgp_draws_write_latent_csv(const lgp_draws* draws, int arm,
                                      const char* patient_id,
                                      const int* future_weeks, int n_future,
                                      int max_draws, const char* path);
/* Posterior mean duration of disease remission, in weeks. */
lgp_status lgp_draws_mean_ddr(const lgp_draws* draws, int arm,
                              double* out_weeks);
lgp_status lgp_draws_degree_proportion(const lgp_draws* draws, int arm,
                                       int degree, double* out);

/* ----------------------------------------------------------- forecasting */

/* `patient_id,week,q_hat` rows for every patient at the given weeks. */
lgp_status lgp_forecast_write_csv(const lgp_draws* draws, const int* weeks,
                                  int n_weeks, const char* path);
lgp_status lgp_forecast_patient(const lgp_draws* draws, int arm,
                                const char* patient_id, const int* weeks,
                                int n_weeks, double* out_q);
/* Population average of q_hat at one week. */
lgp_status lgp_forecast_mean(const lgp_draws* draws, int week, double* out_q);

/* ------------------------------------------------------------ monitoring */

/* verdict: +1 stop superior, 0 continue, -1 stop futile. */
lgp_status lgp_monitor(const lgp_draws* draws, const lgp_monitor_config* cfg,
                       double* out_eta, int* out_verdict);

/* ------------------------------------------------------------- scenarios */

/* Simulates a dataset from the scenario truth. patients_per_arm/weeks <= 0
 * use the scenario's generate block. */
lgp_status lgp_generate(const char* scenario_json_path, int patients_per_arm,
                        int weeks, unsigned long long seed, lgp_dataset** out);
/* `arm,week,mu` grid of the scenario's true mean functions. */
lgp_status lgp_scenario_write_true_mean_csv(const char* scenario_json_path,
                                            const char* path);

typedef struct lgp_sim_options {
  unsigned long long seed;
  long replicates; /* 0 = scenario default */
  int paper_scale; /* use the scenario's paper-scale replicates and chain */
  long iterations; /* 0 = scenario default */
  long burn_in;    /* -1 = scenario default */
  int thin;        /* 0 = scenario default */
  int threads;     /* 0 = hardware concurrency */
  int verbose;
} lgp_sim_options;
void lgp_sim_options_init(lgp_sim_options* opts);

typedef struct lgp_operating_characteristics {
  double avg_duration_weeks;
  double max_duration_weeks;
  double avg_patients_per_arm;
  double superiority_rate;
  double futility_rate;
  double no_stop_rate;
  long replicates;
} lgp_operating_characteristics;

/* Runs the replicate trials; either CSV path may be NULL to skip writing. */
lgp_status lgp_simulate(const char* scenario_json_path,
                        const lgp_sim_options* opts,
                        const char* trials_csv_path,
                        const char* summary_csv_path,
                        lgp_operating_characteristics* out);

#ifdef __cplusplus
}
#endif

#endif /* LGP_LGP_H */
