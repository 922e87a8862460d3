#include "lgp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "lgp/errors.hpp"

namespace lgp {

using nlohmann::json;

double MeanSpec::value(double t) const {
  if (kind == Kind::Poly) {
    double v = 0.0;
    for (int d = static_cast<int>(poly_beta.size()) - 1; d >= 0; --d)
      v = v * t + poly_beta[d];
    return v;
  }
  return trig_alpha + std::sin(trig_beta0 * M_PI * t);
}

void validate_truth(const ScenarioTruth& truth) {
  if (truth.arm_means.empty() || truth.arm_means.size() > 2)
    throw ValidationError("scenario must define 1 or 2 arms");
  if (truth.horizon_weeks < 1) throw ValidationError("horizon_weeks must be >= 1");
  if (!kernel_params_valid(truth.kernel, truth.kernel_type))
    throw ValidationError("invalid kernel parameters");
  for (const MeanSpec& m : truth.arm_means)
    if (m.kind == MeanSpec::Kind::Poly && m.poly_beta.size() == 0)
      throw ValidationError("polynomial mean needs coefficients");
}

void validate_design(const TrialDesign& design) {
  if (design.max_patients_per_arm < 1)
    throw ValidationError("max_patients_per_arm must be >= 1");
  if (design.accrual_min < 0 || design.accrual_max < design.accrual_min)
    throw ValidationError("accrual range invalid");
  if (design.first_interim_week < 1 ||
      design.first_interim_week > design.horizon_weeks)
    throw ValidationError("first interim must lie within the horizon");
  if (design.replicates < 1) throw ValidationError("replicates must be >= 1");
  validate_monitor(design.monitor);
  validate_mcmc(design.interim_mcmc);
  validate_prior(design.prior);
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* key : allowed)
      if (item.key() == key) ok = true;
    if (!ok)
      throw ValidationError("scenario: unknown key '" + item.key() + "' in " +
                            context);
  }
}

MeanSpec parse_mean(const json& j) {
  check_keys(j, {"type", "coefficients", "alpha", "beta0"}, "mean");
  MeanSpec spec;
  const std::string type = j.at("type").get<std::string>();
  if (type == "poly") {
    const std::vector<double> coeffs =
        j.at("coefficients").get<std::vector<double>>();
    if (coeffs.empty()) throw ValidationError("poly mean needs coefficients");
    spec.kind = MeanSpec::Kind::Poly;
    spec.poly_beta = Eigen::Map<const Eigen::VectorXd>(
        coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
  } else if (type == "trig") {
    spec.kind = MeanSpec::Kind::Trig;
    spec.trig_alpha = j.at("alpha").get<double>();
    spec.trig_beta0 = j.at("beta0").get<double>();
  } else {
    throw ValidationError("mean type must be 'poly' or 'trig'");
  }
  return spec;
}

McmcConfig parse_mcmc(const json& j, McmcConfig base) {
  check_keys(j, {"iterations", "burn_in", "thin", "hmc_steps", "hmc_eps"},
             "mcmc");
  if (j.contains("iterations")) base.n_iters = j.at("iterations").get<long>();
  if (j.contains("burn_in")) base.burn_in = j.at("burn_in").get<long>();
  if (j.contains("thin")) base.thin = j.at("thin").get<int>();
  if (j.contains("hmc_steps")) base.hmc_steps = j.at("hmc_steps").get<int>();
  if (j.contains("hmc_eps")) base.hmc_eps = j.at("hmc_eps").get<double>();
  return base;
}

PriorConfig parse_prior(const json& j, PriorConfig base) {
  check_keys(j,
             {"max_degree", "beta_prior_mean", "beta_prior_var",
              "theta_prior_mean", "theta_prior_var", "threshold"},
             "prior");
  if (j.contains("max_degree")) base.max_degree = j.at("max_degree").get<int>();
  if (j.contains("beta_prior_mean"))
    base.beta_prior_mean = j.at("beta_prior_mean").get<double>();
  if (j.contains("beta_prior_var"))
    base.beta_prior_var = j.at("beta_prior_var").get<double>();
  if (j.contains("theta_prior_mean")) {
    const auto v = j.at("theta_prior_mean").get<std::vector<double>>();
    if (v.size() != 3) throw ValidationError("theta_prior_mean needs 3 values");
    std::copy(v.begin(), v.end(), base.theta_prior_mean.begin());
  }
  if (j.contains("theta_prior_var")) {
    const auto v = j.at("theta_prior_var").get<std::vector<double>>();
    if (v.size() != 3) throw ValidationError("theta_prior_var needs 3 values");
    std::copy(v.begin(), v.end(), base.theta_prior_var.begin());
  }
  if (j.contains("threshold")) base.threshold = j.at("threshold").get<double>();
  return base;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ParseError("scenario '" + path + "': " + e.what());
  }

  check_keys(root, {"name", "horizon_weeks", "threshold", "kernel", "arms",
                    "generate", "design"},
             "scenario");
  Scenario sc;
  if (root.contains("name")) sc.name = root.at("name").get<std::string>();
  sc.truth.horizon_weeks = root.value("horizon_weeks", 35);
  sc.truth.threshold = root.value("threshold", 0.0);

  if (root.contains("kernel")) {
    const json& k = root.at("kernel");
    check_keys(k, {"type", "theta1", "theta2", "r", "jitter"}, "kernel");
    const std::string type = k.value("type", std::string("periodic"));
    if (type == "periodic")
      sc.truth.kernel_type = KernelType::Periodic;
    else if (type == "sqexp")
      sc.truth.kernel_type = KernelType::SquaredExp;
    else
      throw ValidationError("kernel type must be 'periodic' or 'sqexp'");
    sc.truth.kernel.theta1 = k.value("theta1", 1.0);
    sc.truth.kernel.theta2 = k.value("theta2", 3.5);
    sc.truth.kernel.r = k.value("r", 2.0);
    sc.truth.kernel.jitter = k.value("jitter", 0.1);
  }

  if (!root.contains("arms")) throw ValidationError("scenario needs 'arms'");
  for (const json& arm : root.at("arms")) {
    check_keys(arm, {"mean"}, "arm");
    sc.truth.arm_means.push_back(parse_mean(arm.at("mean")));
  }

  if (root.contains("generate")) {
    const json& g = root.at("generate");
    check_keys(g, {"patients_per_arm", "weeks"}, "generate");
    sc.generate.patients_per_arm = g.value("patients_per_arm", 100);
    sc.generate.weeks = g.value("weeks", sc.truth.horizon_weeks);
  } else {
    sc.generate.weeks = sc.truth.horizon_weeks;
  }

  sc.design.horizon_weeks = sc.truth.horizon_weeks;
  sc.design.prior.threshold = sc.truth.threshold;
  if (root.contains("design")) {
    const json& d = root.at("design");
    check_keys(d,
               {"max_patients_per_arm", "accrual_min", "accrual_max",
                "first_interim_week", "replicates", "monitor", "mcmc", "prior",
                "paper_scale"},
               "design");
    sc.design.max_patients_per_arm = d.value("max_patients_per_arm", 100);
    sc.design.accrual_min = d.value("accrual_min", 2);
    sc.design.accrual_max = d.value("accrual_max", 4);
    sc.design.first_interim_week = d.value("first_interim_week", 23);
    sc.design.replicates = d.value("replicates", 20);
    if (d.contains("monitor")) {
      const json& m = d.at("monitor");
      check_keys(m, {"delta", "xi_upper", "xi_lower"}, "monitor");
      sc.design.monitor.delta_weeks = m.value("delta", 2.0);
      sc.design.monitor.xi_upper = m.value("xi_upper", 0.95);
      sc.design.monitor.xi_lower = m.value("xi_lower", 0.05);
    }
    if (d.contains("mcmc"))
      sc.design.interim_mcmc = parse_mcmc(d.at("mcmc"), sc.design.interim_mcmc);
    if (d.contains("prior"))
      sc.design.prior = parse_prior(d.at("prior"), sc.design.prior);
    if (d.contains("paper_scale")) {
      const json& p = d.at("paper_scale");
      check_keys(p, {"replicates", "mcmc"}, "paper_scale");
      sc.paper_replicates = p.value("replicates", 100);
      if (p.contains("mcmc"))
        sc.paper_mcmc = parse_mcmc(p.at("mcmc"), sc.paper_mcmc);
    }
  }

  validate_truth(sc.truth);
  validate_design(sc.design);
  return sc;
}

TrialDataset generate_outcomes(const ScenarioTruth& truth, int patients_per_arm,
                               int n_weeks, Rng& rng) {
  validate_truth(truth);
  if (patients_per_arm < 1) throw ValidationError("patients_per_arm must be >= 1");
  if (n_weeks < 1 || n_weeks > truth.horizon_weeks)
    throw ValidationError("weeks must lie in [1, horizon]");

  TrialDataset data;
  data.horizon_weeks = truth.horizon_weeks;

  std::vector<int> weeks(n_weeks);
  for (int w = 0; w < n_weeks; ++w) weeks[w] = w + 1;
  const std::vector<double> times = weeks_to_times(weeks, data.time_scale);
  const CovMatrix cov = build_cov(times, truth.kernel_type, truth.kernel);

  for (int arm = 1; arm <= static_cast<int>(truth.arm_means.size()); ++arm) {
    Eigen::VectorXd mean(n_weeks);
    for (int w = 0; w < n_weeks; ++w)
      mean[w] = truth.arm_means[arm - 1].value(times[w]);
    for (int j = 0; j < patients_per_arm; ++j) {
      const Eigen::VectorXd latent = mvn_sample(mean, cov, rng);
      PatientSeries p;
      p.arm = arm;
      p.patient_id = "a" + std::to_string(arm) + "p" + std::to_string(j + 1);
      p.weeks = weeks;
      p.outcomes.resize(n_weeks);
      for (int w = 0; w < n_weeks; ++w)
        p.outcomes[w] = latent[w] > truth.threshold ? 1 : 0;
      data.patients.push_back(std::move(p));
    }
  }
  return data;
}

const char* trial_outcome_name(TrialOutcome o) {
  switch (o) {
    case TrialOutcome::StoppedSuperior: return "superiority";
    case TrialOutcome::StoppedFutile: return "futility";
    case TrialOutcome::NoEarlyStop: return "no_stop";
  }
  return "?";
}

TrialRecord run_trial(const ScenarioTruth& truth, const TrialDesign& design,
                      std::uint64_t seed, int replicate_index) {
  validate_truth(truth);
  validate_design(design);
  if (truth.arm_means.size() != 2)
    throw ValidationError("run_trial needs a two-arm scenario");

  Rng rng(seed);
  const int horizon = design.horizon_weeks;
  const double scale = 10.0;

  struct SimPatient {
    int arm;
    int entry_week;
    std::vector<int> outcomes;  // weeks entry..horizon
  };
  std::vector<SimPatient> patients;
  int enrolled[2] = {0, 0};

  // Trajectory covariance factors per entry week (same grid for both arms).
  std::vector<CovMatrix> cov_by_entry(horizon + 1);
  std::vector<bool> cov_ready(horizon + 1, false);

  const auto enroll = [&](int arm, int week, int count) {
    for (int c = 0; c < count; ++c) {
      std::vector<int> weeks(horizon - week + 1);
      for (std::size_t i = 0; i < weeks.size(); ++i)
        weeks[i] = week + static_cast<int>(i);
      const std::vector<double> times = weeks_to_times(weeks, scale);
      if (!cov_ready[week]) {
        cov_by_entry[week] = build_cov(times, truth.kernel_type, truth.kernel);
        cov_ready[week] = true;
      }
      Eigen::VectorXd mean(times.size());
      for (std::size_t i = 0; i < times.size(); ++i)
        mean[static_cast<Eigen::Index>(i)] =
            truth.arm_means[arm - 1].value(times[i]);
      const Eigen::VectorXd latent = mvn_sample(mean, cov_by_entry[week], rng);
      SimPatient p;
      p.arm = arm;
      p.entry_week = week;
      p.outcomes.resize(weeks.size());
      for (std::size_t i = 0; i < weeks.size(); ++i)
        p.outcomes[i] =
            latent[static_cast<Eigen::Index>(i)] > truth.threshold ? 1 : 0;
      patients.push_back(std::move(p));
      ++enrolled[arm - 1];
    }
  };

  TrialRecord record;
  record.replicate = replicate_index;

  for (int week = 1; week <= horizon; ++week) {
    for (int arm = 1; arm <= 2; ++arm) {
      const int room = design.max_patients_per_arm - enrolled[arm - 1];
      const int requested = rng.uniform_int(design.accrual_min, design.accrual_max);
      enroll(arm, week, std::min(room, requested));
    }

    if (week < design.first_interim_week) continue;

    TrialDataset data;
    data.horizon_weeks = horizon;
    for (std::size_t j = 0; j < patients.size(); ++j) {
      const SimPatient& sp = patients[j];
      PatientSeries p;
      p.arm = sp.arm;
      p.patient_id = "t" + std::to_string(j + 1);
      const int n_obs = week - sp.entry_week + 1;
      p.weeks.resize(n_obs);
      p.outcomes.resize(n_obs);
      for (int i = 0; i < n_obs; ++i) {
        p.weeks[i] = sp.entry_week + i;
        p.outcomes[i] = sp.outcomes[i];
      }
      data.patients.push_back(std::move(p));
    }

    McmcConfig mcmc = design.interim_mcmc;
    mcmc.seed = Rng::derive(seed, static_cast<std::uint64_t>(week));
    const PosteriorDraws draws = run_chain(data, design.prior, mcmc);
    const double eta = estimate_eta(draws, design.monitor, horizon / scale);
    const MonitorDecision decision = monitor_decision(eta, design.monitor);

    record.eta_final = eta;
    if (decision.verdict != Verdict::Continue) {
      record.stop_week = week;
      record.outcome = decision.verdict == Verdict::StopSuperior
                           ? TrialOutcome::StoppedSuperior
                           : TrialOutcome::StoppedFutile;
      record.enrolled_arm1 = enrolled[0];
      record.enrolled_arm2 = enrolled[1];
      return record;
    }
  }

  record.stop_week = horizon;
  record.outcome = TrialOutcome::NoEarlyStop;
  record.enrolled_arm1 = enrolled[0];
  record.enrolled_arm2 = enrolled[1];
  return record;
}

OperatingCharacteristics operating_characteristics(
    const std::vector<TrialRecord>& records) {
  if (records.empty()) throw ValidationError("no trial records");
  OperatingCharacteristics oc;
  oc.replicates = static_cast<long>(records.size());
  double dur = 0.0, pat = 0.0, max_dur = 0.0;
  long superior = 0, futile = 0, none = 0;
  for (const TrialRecord& r : records) {
    dur += r.stop_week;
    max_dur = std::max(max_dur, static_cast<double>(r.stop_week));
    pat += 0.5 * (r.enrolled_arm1 + r.enrolled_arm2);
    switch (r.outcome) {
      case TrialOutcome::StoppedSuperior: ++superior; break;
      case TrialOutcome::StoppedFutile: ++futile; break;
      case TrialOutcome::NoEarlyStop: ++none; break;
    }
  }
  const double n = static_cast<double>(records.size());
  oc.avg_duration_weeks = dur / n;
  oc.max_duration_weeks = max_dur;
  oc.avg_patients_per_arm = pat / n;
  oc.superiority_rate = superior / n;
  oc.futility_rate = futile / n;
  oc.no_stop_rate = none / n;
  return oc;
}

OperatingCharacteristics simulate_trials(const Scenario& scenario,
                                         const SimOptions& options,
                                         std::vector<TrialRecord>* records_out) {
  TrialDesign design = scenario.design;
  int replicates = design.replicates;
  if (options.paper_scale) {
    replicates = scenario.paper_replicates;
    design.interim_mcmc = scenario.paper_mcmc;
  }
  if (options.replicates_override > 0) replicates = options.replicates_override;
  if (options.iters_override > 0) design.interim_mcmc.n_iters = options.iters_override;
  if (options.burn_in_override >= 0) design.interim_mcmc.burn_in = options.burn_in_override;
  if (options.thin_override > 0) design.interim_mcmc.thin = options.thin_override;
  validate_design(design);

  std::vector<TrialRecord> records(replicates);
  int threads = options.threads > 0
                    ? options.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, replicates));

  std::mutex log_mutex;
  const auto worker = [&](int first, int step) {
    for (int r = first; r < replicates; r += step) {
      records[r] = run_trial(scenario.truth, design,
                             Rng::derive(options.seed, static_cast<std::uint64_t>(r)), r);
      if (options.verbose) {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "trial %d/%d: stop week %d (%s)\n", r + 1,
                     replicates, records[r].stop_week,
                     trial_outcome_name(records[r].outcome));
      }
    }
  };

  if (threads == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
    for (std::thread& t : pool) t.join();
  }

  if (records_out) *records_out = records;
  return operating_characteristics(records);
}

void write_trials_csv(const std::vector<TrialRecord>& records,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "replicate,stop_week,outcome,eta_final,enrolled_arm1,enrolled_arm2\n";
  for (const TrialRecord& r : records)
    out << r.replicate << ',' << r.stop_week << ',' << trial_outcome_name(r.outcome)
        << ',' << r.eta_final << ',' << r.enrolled_arm1 << ',' << r.enrolled_arm2
        << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_oc_csv(const OperatingCharacteristics& oc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "avg_duration_weeks,max_duration_weeks,avg_patients_per_arm,"
         "superiority_rate,futility_rate,no_stop_rate,replicates\n";
  out << oc.avg_duration_weeks << ',' << oc.max_duration_weeks << ','
      << oc.avg_patients_per_arm << ',' << oc.superiority_rate << ','
      << oc.futility_rate << ',' << oc.no_stop_rate << ',' << oc.replicates
      << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_true_mean_csv(const ScenarioTruth& truth, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "arm,week,mu\n";
  for (int arm = 1; arm <= static_cast<int>(truth.arm_means.size()); ++arm)
    for (int week = 1; week <= truth.horizon_weeks; ++week)
      out << arm << ',' << week << ','
          << truth.arm_means[arm - 1].value(week / 10.0) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace lgp
