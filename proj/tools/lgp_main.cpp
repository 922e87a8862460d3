// Command-line front end for the latent Gaussian process trial library.
// All model work goes through the C API in lgp/lgp.h; this file only parses
// flags and config files and shuttles paths around.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "lgp/lgp.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

int exit_code_for(lgp_status status) {
  switch (status) {
    case LGP_OK:
      return kExitOk;
    case LGP_ERR_INVALID_ARGUMENT:
    case LGP_ERR_VALIDATION:
    case LGP_ERR_IO:
      return kExitUsage;
    case LGP_ERR_NUMERICAL:
    case LGP_ERR_INTERNAL:
      return kExitNumerical;
  }
  return kExitNumerical;
}

[[noreturn]] void fail(lgp_status status) {
  std::fprintf(stderr, "error: %s\n", lgp_last_error());
  std::exit(exit_code_for(status));
}

void check(lgp_status status) {
  if (status != LGP_OK) fail(status);
}

[[noreturn]] void usage_error(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  std::exit(kExitUsage);
}

// Knobs shared by the fitting subcommands. Flag values win over config-file
// values, which win over defaults.
struct RunConfig {
  std::string data_path;
  std::string config_path;
  std::string out_dir = ".";
  int horizon = 35;
  unsigned long long seed = 20240915ULL;
  lgp_prior_config prior{};
  lgp_mcmc_config mcmc{};
  lgp_monitor_config monitor{};
};

struct Knobs {
  CLI::Option* seed = nullptr;
  CLI::Option* iters = nullptr;
  CLI::Option* burnin = nullptr;
  CLI::Option* thin = nullptr;
  CLI::Option* hmc_steps = nullptr;
  CLI::Option* hmc_eps = nullptr;
  CLI::Option* ah = nullptr;
  CLI::Option* max_degree = nullptr;
  CLI::Option* delta = nullptr;
  CLI::Option* xi_upper = nullptr;
  CLI::Option* xi_lower = nullptr;
  CLI::Option* horizon = nullptr;
};

Knobs add_common_flags(CLI::App* cmd, RunConfig& cfg, bool with_monitor) {
  lgp_prior_config_init(&cfg.prior);
  lgp_mcmc_config_init(&cfg.mcmc);
  lgp_monitor_config_init(&cfg.monitor);
  cfg.mcmc.seed = cfg.seed;

  Knobs k;
  cmd->add_option("--config", cfg.config_path, "JSON config file; flags win");
  cmd->add_option("--out", cfg.out_dir, "Output directory");
  k.seed = cmd->add_option("--seed", cfg.seed, "RNG seed");
  k.iters = cmd->add_option("--iters", cfg.mcmc.iterations, "MCMC iterations");
  k.burnin = cmd->add_option("--burnin", cfg.mcmc.burn_in, "Burn-in iterations");
  k.thin = cmd->add_option("--thin", cfg.mcmc.thin, "Thinning lag");
  k.hmc_steps = cmd->add_option("--hmc-steps", cfg.mcmc.hmc_steps, "Leapfrog steps");
  k.hmc_eps = cmd->add_option("--hmc-eps", cfg.mcmc.hmc_eps, "Leapfrog stepsize");
  k.ah = cmd->add_option("--ah", cfg.prior.threshold, "Threshold a_h");
  k.max_degree = cmd->add_option("--max-degree", cfg.prior.max_degree,
                                 "Max polynomial degree M");
  k.horizon = cmd->add_option("--horizon", cfg.horizon, "Trial horizon in weeks");
  if (with_monitor) {
    k.delta = cmd->add_option("--delta", cfg.monitor.delta_weeks,
                              "Superiority margin (weeks)");
    k.xi_upper = cmd->add_option("--xi-upper", cfg.monitor.xi_upper,
                                 "Superiority cutoff");
    k.xi_lower = cmd->add_option("--xi-lower", cfg.monitor.xi_lower,
                                 "Futility cutoff");
  }
  return k;
}

// Applies config-file values underneath any flags the user typed.
void apply_config_file(const RunConfig& cfg_paths, const Knobs& k, RunConfig& cfg) {
  if (cfg_paths.config_path.empty()) return;
  std::ifstream in(cfg_paths.config_path);
  if (!in) usage_error("cannot open config '" + cfg_paths.config_path + "'");
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    usage_error(std::string("config parse: ") + e.what());
  }

  const auto unknown = [&](const std::string& key) {
    usage_error("config: unknown key '" + key + "'");
  };
  for (const auto& item : root.items()) {
    const std::string& key = item.key();
    const json& v = item.value();
    try {
      if (key == "seed") {
        if (!k.seed->count()) cfg.seed = v.get<unsigned long long>();
      } else if (key == "iters") {
        if (!k.iters->count()) cfg.mcmc.iterations = v.get<long>();
      } else if (key == "burnin") {
        if (!k.burnin->count()) cfg.mcmc.burn_in = v.get<long>();
      } else if (key == "thin") {
        if (!k.thin->count()) cfg.mcmc.thin = v.get<int>();
      } else if (key == "hmc_steps") {
        if (!k.hmc_steps->count()) cfg.mcmc.hmc_steps = v.get<int>();
      } else if (key == "hmc_eps") {
        if (!k.hmc_eps->count()) cfg.mcmc.hmc_eps = v.get<double>();
      } else if (key == "ah") {
        if (!k.ah->count()) cfg.prior.threshold = v.get<double>();
      } else if (key == "max_degree") {
        if (!k.max_degree->count()) cfg.prior.max_degree = v.get<int>();
      } else if (key == "horizon") {
        if (!k.horizon->count()) cfg.horizon = v.get<int>();
      } else if (key == "delta") {
        if (k.delta && !k.delta->count()) cfg.monitor.delta_weeks = v.get<double>();
      } else if (key == "xi_upper") {
        if (k.xi_upper && !k.xi_upper->count()) cfg.monitor.xi_upper = v.get<double>();
      } else if (key == "xi_lower") {
        if (k.xi_lower && !k.xi_lower->count()) cfg.monitor.xi_lower = v.get<double>();
      } else {
        unknown(key);
      }
    } catch (const json::exception& e) {
      usage_error("config key '" + key + "': " + e.what());
    }
  }
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

lgp_draws* fit_dataset(const RunConfig& cfg, lgp_dataset** out_ds) {
  lgp_dataset* ds = nullptr;
  check(lgp_dataset_load(cfg.data_path.c_str(), cfg.horizon, &ds));
  lgp_draws* draws = nullptr;
  lgp_mcmc_config mcmc = cfg.mcmc;
  mcmc.seed = cfg.seed;
  const lgp_status status = lgp_fit(ds, &cfg.prior, &mcmc, &draws);
  if (status != LGP_OK) {
    lgp_dataset_free(ds);
    fail(status);
  }
  if (out_ds)
    *out_ds = ds;
  else
    lgp_dataset_free(ds);
  return draws;
}

int cmd_fit(const RunConfig& cfg, int latent_arm,
            const std::string& latent_patient) {
  lgp_draws* draws = fit_dataset(cfg, nullptr);
  check(lgp_draws_write_summary_csv(draws, out_path(cfg, "summary.csv").c_str()));
  check(lgp_draws_write_trace_csv(draws, out_path(cfg, "trace.csv").c_str()));
  check(lgp_draws_write_diagnostics_csv(
      draws, out_path(cfg, "diagnostics.csv").c_str()));
  check(lgp_draws_write_autocorr_csv(draws, out_path(cfg, "autocorr.csv").c_str()));
  if (!latent_patient.empty()) {
    check(lgp_draws_write_latent_csv(draws, latent_arm, latent_patient.c_str(),
                                     nullptr, 0, 20,
                                     out_path(cfg, "latent.csv").c_str()));
  }
  std::printf("fit: %ld retained draws, HMC acceptance %.3f\n",
              lgp_draws_count(draws), lgp_draws_hmc_acceptance(draws));
  std::printf("wrote %s, %s, %s\n", out_path(cfg, "summary.csv").c_str(),
              out_path(cfg, "trace.csv").c_str(),
              out_path(cfg, "diagnostics.csv").c_str());
  lgp_draws_free(draws);
  return kExitOk;
}

int cmd_forecast(const RunConfig& cfg, const std::vector<int>& weeks) {
  if (weeks.empty()) usage_error("forecast needs --weeks");
  lgp_draws* draws = fit_dataset(cfg, nullptr);
  const std::string path = out_path(cfg, "forecast.csv");
  check(lgp_forecast_write_csv(draws, weeks.data(),
                               static_cast<int>(weeks.size()), path.c_str()));
  std::printf("wrote %s\n", path.c_str());
  lgp_draws_free(draws);
  return kExitOk;
}

int cmd_monitor(const RunConfig& cfg) {
  lgp_draws* draws = fit_dataset(cfg, nullptr);
  double eta = 0.0;
  int verdict = 0;
  const lgp_status status = lgp_monitor(draws, &cfg.monitor, &eta, &verdict);
  if (status != LGP_OK) {
    lgp_draws_free(draws);
    fail(status);
  }
  const char* name = verdict > 0   ? "stop_superior"
                     : verdict < 0 ? "stop_futile"
                                   : "continue";
  std::printf("eta_hat = %.4f -> %s\n", eta, name);
  const std::string path = out_path(cfg, "monitor.csv");
  std::ofstream out(path);
  out << "eta_hat,verdict,delta,xi_upper,xi_lower\n"
      << eta << ',' << name << ',' << cfg.monitor.delta_weeks << ','
      << cfg.monitor.xi_upper << ',' << cfg.monitor.xi_lower << '\n';
  if (!out) usage_error("cannot write '" + path + "'");
  lgp_draws_free(draws);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent Gaussian process fitting, forecasting and trial monitoring"};
  app.require_subcommand(1);

  RunConfig fit_cfg, fc_cfg, mon_cfg;

  CLI::App* fit = app.add_subcommand("fit", "Fit the model, write posterior summaries");
  fit->add_option("--data", fit_cfg.data_path, "Outcome CSV")->required();
  int fit_latent_arm = 1;
  std::string fit_latent_patient;
  fit->add_option("--emit-latent", fit_latent_patient,
                  "Also write latent realizations for this patient id");
  fit->add_option("--emit-latent-arm", fit_latent_arm, "Arm of --emit-latent");
  const Knobs fit_knobs = add_common_flags(fit, fit_cfg, false);

  CLI::App* forecast = app.add_subcommand("forecast", "Posterior predictive response probabilities");
  forecast->add_option("--data", fc_cfg.data_path, "Outcome CSV")->required();
  std::vector<int> fc_weeks{33, 34, 35};
  forecast->add_option("--weeks", fc_weeks, "Future weeks to forecast");
  const Knobs fc_knobs = add_common_flags(forecast, fc_cfg, false);

  CLI::App* monitor = app.add_subcommand("monitor", "Superiority/futility decision");
  monitor->add_option("--data", mon_cfg.data_path, "Outcome CSV")->required();
  const Knobs mon_knobs = add_common_flags(monitor, mon_cfg, true);

  CLI::App* simulate = app.add_subcommand("simulate", "Replicate trials, operating characteristics");
  std::string sim_scenario, sim_out = ".";
  lgp_sim_options sim_opts;
  lgp_sim_options_init(&sim_opts);
  bool sim_paper = false, sim_verbose = false;
  simulate->add_option("--scenario", sim_scenario, "Scenario JSON")->required();
  simulate->add_option("--out", sim_out, "Output directory");
  simulate->add_option("--seed", sim_opts.seed, "RNG seed");
  simulate->add_option("--replicates", sim_opts.replicates, "Replicate trials");
  simulate->add_option("--iters", sim_opts.iterations, "Interim MCMC iterations");
  simulate->add_option("--burnin", sim_opts.burn_in, "Interim burn-in");
  simulate->add_option("--thin", sim_opts.thin, "Interim thinning");
  simulate->add_option("--threads", sim_opts.threads, "Worker threads");
  simulate->add_flag("--paper-scale", sim_paper, "Paper-scale replicates and chain");
  simulate->add_flag("--verbose", sim_verbose, "Progress to stderr");

  CLI::App* generate = app.add_subcommand("generate", "Simulate a dataset from a scenario");
  std::string gen_scenario, gen_out = ".";
  unsigned long long gen_seed = 20240915ULL;
  int gen_n = 0, gen_weeks = 0;
  bool gen_mean = false;
  generate->add_option("--scenario", gen_scenario, "Scenario JSON")->required();
  generate->add_option("--out", gen_out, "Output directory");
  generate->add_option("--seed", gen_seed, "RNG seed");
  generate->add_option("--n", gen_n, "Patients per arm (0 = scenario default)");
  generate->add_option("--weeks", gen_weeks, "Observed weeks (0 = scenario default)");
  generate->add_flag("--emit-mean", gen_mean, "Also write the true mean grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (fit->parsed()) {
    apply_config_file(fit_cfg, fit_knobs, fit_cfg);
    return cmd_fit(fit_cfg, fit_latent_arm, fit_latent_patient);
  }
  if (forecast->parsed()) {
    apply_config_file(fc_cfg, fc_knobs, fc_cfg);
    return cmd_forecast(fc_cfg, fc_weeks);
  }
  if (monitor->parsed()) {
    apply_config_file(mon_cfg, mon_knobs, mon_cfg);
    return cmd_monitor(mon_cfg);
  }
  if (simulate->parsed()) {
    sim_opts.paper_scale = sim_paper ? 1 : 0;
    sim_opts.verbose = sim_verbose ? 1 : 0;
    std::filesystem::create_directories(sim_out);
    const std::string trials = (std::filesystem::path(sim_out) / "trials.csv").string();
    const std::string summary = (std::filesystem::path(sim_out) / "oc_summary.csv").string();
    lgp_operating_characteristics oc{};
    check(lgp_simulate(sim_scenario.c_str(), &sim_opts, trials.c_str(),
                       summary.c_str(), &oc));
    std::printf(
        "replicates %ld: AD %.2f weeks, MD %.0f, AP %.1f/arm, "
        "superiority %.0f%%, futility %.0f%%, no stop %.0f%%\n",
        oc.replicates, oc.avg_duration_weeks, oc.max_duration_weeks,
        oc.avg_patients_per_arm, 100.0 * oc.superiority_rate,
        100.0 * oc.futility_rate, 100.0 * oc.no_stop_rate);
    std::printf("wrote %s, %s\n", trials.c_str(), summary.c_str());
    return kExitOk;
  }
  if (generate->parsed()) {
    std::filesystem::create_directories(gen_out);
    lgp_dataset* ds = nullptr;
    check(lgp_generate(gen_scenario.c_str(), gen_n, gen_weeks, gen_seed, &ds));
    const std::string path = (std::filesystem::path(gen_out) / "data.csv").string();
    const lgp_status status = lgp_dataset_save(ds, path.c_str());
    lgp_dataset_free(ds);
    check(status);
    std::printf("wrote %s\n", path.c_str());
    if (gen_mean) {
      const std::string mean_path =
          (std::filesystem::path(gen_out) / "mean_grid.csv").string();
      check(lgp_scenario_write_true_mean_csv(gen_scenario.c_str(), mean_path.c_str()));
      std::printf("wrote %s\n", mean_path.c_str());
    }
    return kExitOk;
  }
  return kExitUsage;
}
