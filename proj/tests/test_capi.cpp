#include <doctest.h>

#include <cstring>
#include <fstream>
#include <string>

#include "lgp/lgp.h"

namespace {
std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/lgp_capi_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

std::string two_arm_csv() {
  std::string csv = "arm,patient_id,week,outcome\n";
  // arm 2 responds, arm 1 does not
  for (int j = 1; j <= 4; ++j) {
    for (int w = 1; w <= 8; ++w) {
      csv += "1,a" + std::to_string(j) + "," + std::to_string(w) + ",0\n";
      csv += "2,b" + std::to_string(j) + "," + std::to_string(w) + ",1\n";
    }
  }
  return csv;
}
}  // namespace

TEST_CASE("dataset load, counts and save round trip") {
  const std::string path = write_temp("data.csv", two_arm_csv());
  lgp_dataset* ds = nullptr;
  REQUIRE(lgp_dataset_load(path.c_str(), 35, &ds) == LGP_OK);
  CHECK(lgp_dataset_patient_count(ds) == 8);
  CHECK(lgp_dataset_arm_patient_count(ds, 1) == 4);
  CHECK(lgp_dataset_arm_patient_count(ds, 2) == 4);
  CHECK(lgp_dataset_horizon_weeks(ds) == 35);

  const std::string copy = "/tmp/lgp_capi_copy.csv";
  REQUIRE(lgp_dataset_save(ds, copy.c_str()) == LGP_OK);
  lgp_dataset* ds2 = nullptr;
  REQUIRE(lgp_dataset_load(copy.c_str(), 35, &ds2) == LGP_OK);
  CHECK(lgp_dataset_patient_count(ds2) == 8);
  lgp_dataset_free(ds);
  lgp_dataset_free(ds2);
}

TEST_CASE("error codes and messages") {
  lgp_dataset* ds = nullptr;
  CHECK(lgp_dataset_load("/nonexistent/file.csv", 35, &ds) == LGP_ERR_IO);
  CHECK(std::strlen(lgp_last_error()) > 0);
  CHECK(lgp_dataset_load(nullptr, 35, &ds) == LGP_ERR_INVALID_ARGUMENT);

  const std::string bad = write_temp("bad.csv", "arm,patient_id,week,outcome\n1,p,1,7\n");
  CHECK(lgp_dataset_load(bad.c_str(), 35, &ds) == LGP_ERR_VALIDATION);
  CHECK(lgp_version() != nullptr);
}

TEST_CASE("fit, outputs, forecast and monitor through the c api") {
  const std::string path = write_temp("fit.csv", two_arm_csv());
  lgp_dataset* ds = nullptr;
  REQUIRE(lgp_dataset_load(path.c_str(), 35, &ds) == LGP_OK);

  lgp_prior_config prior;
  lgp_prior_config_init(&prior);
  CHECK(prior.max_degree == 5);
  CHECK(prior.beta_prior_var == 100.0);
  lgp_mcmc_config mcmc;
  lgp_mcmc_config_init(&mcmc);
  mcmc.iterations = 300;
  mcmc.burn_in = 100;
  mcmc.thin = 5;
  mcmc.seed = 9;

  lgp_draws* draws = nullptr;
  REQUIRE(lgp_fit(ds, &prior, &mcmc, &draws) == LGP_OK);
  CHECK(lgp_draws_count(draws) == 40);
  CHECK(lgp_draws_hmc_acceptance(draws) >= 0.0);

  CHECK(lgp_draws_write_summary_csv(draws, "/tmp/lgp_capi_summary.csv") == LGP_OK);
  CHECK(lgp_draws_write_trace_csv(draws, "/tmp/lgp_capi_trace.csv") == LGP_OK);
  CHECK(lgp_draws_write_diagnostics_csv(draws, "/tmp/lgp_capi_diag.csv") == LGP_OK);
  CHECK(lgp_draws_write_autocorr_csv(draws, "/tmp/lgp_capi_autocorr.csv") == LGP_OK);
  {
    std::ifstream ac("/tmp/lgp_capi_autocorr.csv");
    std::string header;
    std::getline(ac, header);
    CHECK(header == "param,lag,value");
  }
  const int fw[1] = {9};
  CHECK(lgp_draws_write_latent_csv(draws, 2, "b1", fw, 1, 5,
                                   "/tmp/lgp_capi_latent.csv") == LGP_OK);

  const int weeks[2] = {9, 10};
  double q[2] = {-1.0, -1.0};
  REQUIRE(lgp_forecast_patient(draws, 2, "b1", weeks, 2, q) == LGP_OK);
  CHECK(q[0] >= 0.0);
  CHECK(q[0] <= 1.0);
  CHECK(q[1] >= 0.0);
  double qbar = -1.0;
  REQUIRE(lgp_forecast_mean(draws, 9, &qbar) == LGP_OK);
  CHECK(qbar >= 0.0);
  CHECK(qbar <= 1.0);
  CHECK(lgp_forecast_write_csv(draws, weeks, 2, "/tmp/lgp_capi_forecast.csv") ==
        LGP_OK);
  // Requesting an already-observed week is a validation error.
  CHECK(lgp_forecast_mean(draws, 3, &qbar) == LGP_ERR_VALIDATION);

  lgp_monitor_config mon;
  lgp_monitor_config_init(&mon);
  double eta = -1.0;
  int verdict = -9;
  REQUIRE(lgp_monitor(draws, &mon, &eta, &verdict) == LGP_OK);
  CHECK(eta >= 0.0);
  CHECK(eta <= 1.0);
  CHECK(verdict >= -1);
  CHECK(verdict <= 1);
  // Extreme separation in this dataset favors arm 2 strongly.
  CHECK(verdict == 1);

  double ddr1 = -1.0, ddr2 = -1.0, prop = -1.0;
  REQUIRE(lgp_draws_mean_ddr(draws, 1, &ddr1) == LGP_OK);
  REQUIRE(lgp_draws_mean_ddr(draws, 2, &ddr2) == LGP_OK);
  CHECK(ddr2 > ddr1);
  REQUIRE(lgp_draws_degree_proportion(draws, 1, 0, &prop) == LGP_OK);
  CHECK(prop >= 0.0);
  CHECK(prop <= 1.0);

  lgp_draws_free(draws);
  lgp_dataset_free(ds);
}

TEST_CASE("monitoring a single-arm dataset is a validation error") {
  std::string csv = "arm,patient_id,week,outcome\n";
  for (int w = 1; w <= 6; ++w) csv += "1,solo," + std::to_string(w) + ",1\n";
  const std::string path = write_temp("single.csv", csv);
  lgp_dataset* ds = nullptr;
  REQUIRE(lgp_dataset_load(path.c_str(), 35, &ds) == LGP_OK);
  lgp_prior_config prior;
  lgp_prior_config_init(&prior);
  lgp_mcmc_config mcmc;
  lgp_mcmc_config_init(&mcmc);
  mcmc.iterations = 100;
  mcmc.burn_in = 20;
  mcmc.thin = 2;
  lgp_draws* draws = nullptr;
  REQUIRE(lgp_fit(ds, &prior, &mcmc, &draws) == LGP_OK);
  lgp_monitor_config mon;
  lgp_monitor_config_init(&mon);
  double eta;
  int verdict;
  CHECK(lgp_monitor(draws, &mon, &eta, &verdict) == LGP_ERR_VALIDATION);
  lgp_draws_free(draws);
  lgp_dataset_free(ds);
}

TEST_CASE("scenario generation and simulation through the c api") {
  const std::string scenario = write_temp("scenario.json", R"({
    "name": "capi",
    "horizon_weeks": 9,
    "threshold": 0.0,
    "kernel": {"type": "periodic", "theta1": 1.0, "theta2": 3.5, "r": 2.0, "jitter": 0.1},
    "arms": [
      {"mean": {"type": "poly", "coefficients": [-1.0]}},
      {"mean": {"type": "poly", "coefficients": [-0.3, 0.6]}}
    ],
    "generate": {"patients_per_arm": 6, "weeks": 9},
    "design": {
      "max_patients_per_arm": 5,
      "first_interim_week": 8,
      "replicates": 2,
      "mcmc": {"iterations": 300, "burn_in": 100, "thin": 5}
    }
  })");

  lgp_dataset* ds = nullptr;
  REQUIRE(lgp_generate(scenario.c_str(), 0, 0, 13, &ds) == LGP_OK);
  CHECK(lgp_dataset_patient_count(ds) == 12);
  lgp_dataset_free(ds);
  REQUIRE(lgp_generate(scenario.c_str(), 3, 5, 13, &ds) == LGP_OK);
  CHECK(lgp_dataset_patient_count(ds) == 6);
  lgp_dataset_free(ds);

  CHECK(lgp_scenario_write_true_mean_csv(scenario.c_str(),
                                         "/tmp/lgp_capi_mean.csv") == LGP_OK);

  lgp_sim_options opts;
  lgp_sim_options_init(&opts);
  opts.seed = 3;
  opts.threads = 1;
  lgp_operating_characteristics oc;
  REQUIRE(lgp_simulate(scenario.c_str(), &opts, "/tmp/lgp_capi_trials.csv",
                       "/tmp/lgp_capi_oc.csv", &oc) == LGP_OK);
  CHECK(oc.replicates == 2);
  CHECK(oc.superiority_rate + oc.futility_rate + oc.no_stop_rate ==
        doctest::Approx(1.0));
  CHECK(oc.max_duration_weeks <= 9.0);

  CHECK(lgp_simulate("/missing.json", &opts, nullptr, nullptr, &oc) == LGP_ERR_IO);
}
