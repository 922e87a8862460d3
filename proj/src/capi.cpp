#include "lgp/lgp.h"

#include <cstring>
#include <string>

#include "lgp/chain.hpp"
#include "lgp/errors.hpp"
#include "lgp/inference.hpp"
#include "lgp/simulate.hpp"

struct lgp_dataset {
  lgp::TrialDataset data;
};

struct lgp_draws {
  lgp::PosteriorDraws draws;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename Fn>
lgp_status guarded(Fn&& fn) {
  try {
    fn();
    return LGP_OK;
  } catch (const lgp::NumericalError& e) {
    set_error(e.what());
    return LGP_ERR_NUMERICAL;
  } catch (const lgp::IoError& e) {
    set_error(e.what());
    return LGP_ERR_IO;
  } catch (const lgp::ValidationError& e) {
    set_error(e.what());
    return LGP_ERR_VALIDATION;
  } catch (const std::exception& e) {
    set_error(e.what());
    return LGP_ERR_INTERNAL;
  }
}

lgp_status bad_argument(const char* msg) {
  set_error(msg);
  return LGP_ERR_INVALID_ARGUMENT;
}

lgp::PriorConfig to_prior(const lgp_prior_config& c) {
  lgp::PriorConfig p;
  p.max_degree = c.max_degree;
  p.beta_prior_mean = c.beta_prior_mean;
  p.beta_prior_var = c.beta_prior_var;
  for (int i = 0; i < 3; ++i) {
    p.theta_prior_mean[i] = c.theta_prior_mean[i];
    p.theta_prior_var[i] = c.theta_prior_var[i];
  }
  p.threshold = c.threshold;
  return p;
}

lgp::McmcConfig to_mcmc(const lgp_mcmc_config& c) {
  lgp::McmcConfig m;
  m.n_iters = c.iterations;
  m.burn_in = c.burn_in;
  m.thin = c.thin;
  m.hmc_steps = c.hmc_steps;
  m.hmc_eps = c.hmc_eps;
  m.adapt_eps = c.adapt_eps != 0;
  m.seed = c.seed;
  return m;
}

lgp::MonitorConfig to_monitor(const lgp_monitor_config& c) {
  lgp::MonitorConfig m;
  m.delta_weeks = c.delta_weeks;
  m.xi_upper = c.xi_upper;
  m.xi_lower = c.xi_lower;
  return m;
}

}  // namespace

extern "C" {

const char* lgp_version(void) { return "0.1.0"; }

const char* lgp_last_error(void) { return g_last_error.c_str(); }

lgp_status lgp_dataset_load(const char* csv_path, int horizon_weeks,
                            lgp_dataset** out) {
  if (!csv_path || !out) return bad_argument("null argument");
  return guarded([&] {
    auto* handle = new lgp_dataset{lgp::load_dataset(csv_path, horizon_weeks)};
    *out = handle;
  });
}

lgp_status lgp_dataset_save(const lgp_dataset* ds, const char* csv_path) {
  if (!ds || !csv_path) return bad_argument("null argument");
  return guarded([&] { lgp::save_dataset(ds->data, csv_path); });
}

void lgp_dataset_free(lgp_dataset* ds) { delete ds; }

int lgp_dataset_patient_count(const lgp_dataset* ds) {
  return ds ? static_cast<int>(ds->data.patients.size()) : 0;
}

int lgp_dataset_arm_patient_count(const lgp_dataset* ds, int arm) {
  return ds ? ds->data.arm_patient_count(arm) : 0;
}

int lgp_dataset_horizon_weeks(const lgp_dataset* ds) {
  return ds ? ds->data.horizon_weeks : 0;
}

void lgp_prior_config_init(lgp_prior_config* cfg) {
  if (!cfg) return;
  const lgp::PriorConfig d;
  cfg->max_degree = d.max_degree;
  cfg->beta_prior_mean = d.beta_prior_mean;
  cfg->beta_prior_var = d.beta_prior_var;
  for (int i = 0; i < 3; ++i) {
    cfg->theta_prior_mean[i] = d.theta_prior_mean[i];
    cfg->theta_prior_var[i] = d.theta_prior_var[i];
  }
  cfg->threshold = d.threshold;
}

void lgp_mcmc_config_init(lgp_mcmc_config* cfg) {
  if (!cfg) return;
  const lgp::McmcConfig d;
  cfg->iterations = d.n_iters;
  cfg->burn_in = d.burn_in;
  cfg->thin = d.thin;
  cfg->hmc_steps = d.hmc_steps;
  cfg->hmc_eps = d.hmc_eps;
  cfg->adapt_eps = d.adapt_eps ? 1 : 0;
  cfg->seed = d.seed;
}

void lgp_monitor_config_init(lgp_monitor_config* cfg) {
  if (!cfg) return;
  const lgp::MonitorConfig d;
  cfg->delta_weeks = d.delta_weeks;
  cfg->xi_upper = d.xi_upper;
  cfg->xi_lower = d.xi_lower;
}

lgp_status lgp_fit(const lgp_dataset* ds, const lgp_prior_config* prior,
                   const lgp_mcmc_config* mcmc, lgp_draws** out) {
  if (!ds || !prior || !mcmc || !out) return bad_argument("null argument");
  return guarded([&] {
    auto* handle = new lgp_draws{
        lgp::run_chain(ds->data, to_prior(*prior), to_mcmc(*mcmc))};
    *out = handle;
  });
}

void lgp_draws_free(lgp_draws* draws) { delete draws; }

long lgp_draws_count(const lgp_draws* draws) {
  return draws ? static_cast<long>(draws->draws.count()) : 0;
}

double lgp_draws_hmc_acceptance(const lgp_draws* draws) {
  return draws ? draws->draws.hmc_acceptance : 0.0;
}

lgp_status lgp_draws_write_summary_csv(const lgp_draws* draws, const char* path) {
  if (!draws || !path) return bad_argument("null argument");
  return guarded([&] { lgp::write_summary_csv(draws->draws, path); });
}

lgp_status lgp_draws_write_trace_csv(const lgp_draws* draws, const char* path) {
  if (!draws || !path) return bad_argument("null argument");
  return guarded([&] { lgp::write_trace_csv(draws->draws, path); });
}

lgp_status lgp_draws_write_diagnostics_csv(const lgp_draws* draws,
                                           const char* path) {
  if (!draws || !path) return bad_argument("null argument");
  return guarded([&] { lgp::write_diagnostics_csv(draws->draws, path); });
}

lgp_status lgp_draws_write_autocorr_csv(const lgp_draws* draws,
                                        const char* path) {
  if (!draws || !path) return bad_argument("null argument");
  return guarded([&] { lgp::write_autocorr_csv(draws->draws, path); });
}

lgp_status lgp_draws_write_latent_csv(const lgp_draws* draws, int arm,
                                      const char* patient_id,
                                      const int* future_weeks, int n_future,
                                      int max_draws, const char* path) {
  if (!draws || !patient_id || !path || (n_future > 0 && !future_weeks))
    return bad_argument("null argument");
  return guarded([&] {
    std::vector<int> weeks(future_weeks, future_weeks + n_future);
    lgp::write_latent_csv(draws->draws, arm, patient_id, weeks, max_draws, path);
  });
}

lgp_status lgp_draws_mean_ddr(const lgp_draws* draws, int arm,
                              double* out_weeks) {
  if (!draws || !out_weeks) return bad_argument("null argument");
  return guarded([&] { *out_weeks = lgp::posterior_mean_ddr(draws->draws, arm); });
}

lgp_status lgp_draws_degree_proportion(const lgp_draws* draws, int arm,
                                       int degree, double* out) {
  if (!draws || !out) return bad_argument("null argument");
  return guarded(
      [&] { *out = lgp::degree_proportion(draws->draws, arm, degree); });
}

lgp_status lgp_forecast_write_csv(const lgp_draws* draws, const int* weeks,
                                  int n_weeks, const char* path) {
  if (!draws || !weeks || n_weeks < 1 || !path)
    return bad_argument("null or empty argument");
  return guarded([&] {
    std::vector<int> w(weeks, weeks + n_weeks);
    lgp::write_forecast_csv(draws->draws, w, path);
  });
}

lgp_status lgp_forecast_patient(const lgp_draws* draws, int arm,
                                const char* patient_id, const int* weeks,
                                int n_weeks, double* out_q) {
  if (!draws || !patient_id || !weeks || n_weeks < 1 || !out_q)
    return bad_argument("null or empty argument");
  return guarded([&] {
    lgp::ForecastRequest req;
    req.arm = arm;
    req.patient_id = patient_id;
    req.future_weeks.assign(weeks, weeks + n_weeks);
    const std::vector<double> q =
        lgp::forecast_q(draws->draws, req, draws->draws.data, draws->draws.prior);
    std::memcpy(out_q, q.data(), sizeof(double) * q.size());
  });
}

lgp_status lgp_forecast_mean(const lgp_draws* draws, int week, double* out_q) {
  if (!draws || !out_q) return bad_argument("null argument");
  return guarded(
      [&] { *out_q = lgp::forecast_q_population_mean(draws->draws, week); });
}

lgp_status lgp_monitor(const lgp_draws* draws, const lgp_monitor_config* cfg,
                       double* out_eta, int* out_verdict) {
  if (!draws || !cfg || !out_eta || !out_verdict)
    return bad_argument("null argument");
  return guarded([&] {
    const lgp::TrialDataset& data = draws->draws.data;
    if (!data.has_arm(1) || !data.has_arm(2))
      throw lgp::ValidationError("monitoring needs a two-arm dataset");
    const lgp::MonitorConfig mc = to_monitor(*cfg);
    lgp::validate_monitor(mc);
    const double horizon_t = data.horizon_weeks / data.time_scale;
    const double eta = lgp::estimate_eta(draws->draws, mc, horizon_t);
    const lgp::MonitorDecision d = lgp::monitor_decision(eta, mc);
    *out_eta = eta;
    *out_verdict = d.verdict == lgp::Verdict::StopSuperior  ? 1
                   : d.verdict == lgp::Verdict::StopFutile ? -1
                                                           : 0;
  });
}

lgp_status lgp_generate(const char* scenario_json_path, int patients_per_arm,
                        int weeks, unsigned long long seed, lgp_dataset** out) {
  if (!scenario_json_path || !out) return bad_argument("null argument");
  return guarded([&] {
    const lgp::Scenario sc = lgp::load_scenario(scenario_json_path);
    const int n = patients_per_arm > 0 ? patients_per_arm
                                       : sc.generate.patients_per_arm;
    const int w = weeks > 0 ? weeks : sc.generate.weeks;
    lgp::Rng rng(seed);
    auto* handle = new lgp_dataset{lgp::generate_outcomes(sc.truth, n, w, rng)};
    *out = handle;
  });
}

lgp_status lgp_scenario_write_true_mean_csv(const char* scenario_json_path,
                                            const char* path) {
  if (!scenario_json_path || !path) return bad_argument("null argument");
  return guarded([&] {
    const lgp::Scenario sc = lgp::load_scenario(scenario_json_path);
    lgp::write_true_mean_csv(sc.truth, path);
  });
}

void lgp_sim_options_init(lgp_sim_options* opts) {
  if (!opts) return;
  const lgp::SimOptions d;
  opts->seed = d.seed;
  opts->replicates = 0;
  opts->paper_scale = 0;
  opts->iterations = 0;
  opts->burn_in = -1;
  opts->thin = 0;
  opts->threads = 0;
  opts->verbose = 0;
}

lgp_status lgp_simulate(const char* scenario_json_path,
                        const lgp_sim_options* opts,
                        const char* trials_csv_path,
                        const char* summary_csv_path,
                        lgp_operating_characteristics* out) {
  if (!scenario_json_path || !opts) return bad_argument("null argument");
  return guarded([&] {
    const lgp::Scenario sc = lgp::load_scenario(scenario_json_path);
    lgp::SimOptions options;
    options.seed = opts->seed;
    options.replicates_override = static_cast<int>(opts->replicates);
    options.paper_scale = opts->paper_scale != 0;
    options.iters_override = opts->iterations;
    options.burn_in_override = opts->burn_in;
    options.thin_override = opts->thin;
    options.threads = opts->threads;
    options.verbose = opts->verbose != 0;

    std::vector<lgp::TrialRecord> records;
    const lgp::OperatingCharacteristics oc =
        lgp::simulate_trials(sc, options, &records);
    if (trials_csv_path) lgp::write_trials_csv(records, trials_csv_path);
    if (summary_csv_path) lgp::write_oc_csv(oc, summary_csv_path);
    if (out) {
      out->avg_duration_weeks = oc.avg_duration_weeks;
      out->max_duration_weeks = oc.max_duration_weeks;
      out->avg_patients_per_arm = oc.avg_patients_per_arm;
      out->superiority_rate = oc.superiority_rate;
      out->futility_rate = oc.futility_rate;
      out->no_stop_rate = oc.no_stop_rate;
      out->replicates = oc.replicates;
    }
  });
}

}  // extern "C"
