#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lgp/inference.hpp"

namespace lgp {

/// Generating mean of one arm: either a polynomial or alpha + sin(beta0 pi t).
struct MeanSpec {
  enum class Kind { Poly, Trig };
  Kind kind = Kind::Poly;
  Eigen::VectorXd poly_beta = Eigen::VectorXd::Zero(1);
  double trig_alpha = 0.0;
  double trig_beta0 = 1.0;

  double value(double t) const;
};

struct ScenarioTruth {
  std::vector<MeanSpec> arm_means;  // one entry per arm, 1 or 2 arms
  KernelType kernel_type = KernelType::Periodic;
  KernelParams kernel{1.0, 3.5, 2.0, 0.1};
  double threshold = 0.0;
  int horizon_weeks = 35;
};

void validate_truth(const ScenarioTruth& truth);

struct GenerateDefaults {
  int patients_per_arm = 100;
  int weeks = 35;
};

struct TrialDesign {
  int max_patients_per_arm = 100;
  int accrual_min = 2;
  int accrual_max = 4;  // weekly accrual per arm ~ uniform{min..max}
  int first_interim_week = 23;
  int horizon_weeks = 35;
  MonitorConfig monitor;
  McmcConfig interim_mcmc{2500, 500, 10, 20, 0.01, true, 0};
  PriorConfig prior;
  int replicates = 20;
};

void validate_design(const TrialDesign& design);

struct Scenario {
  std::string name;
  ScenarioTruth truth;
  GenerateDefaults generate;
  TrialDesign design;
  // Paper-scale overrides, applied when simulate runs with paper_scale.
  int paper_replicates = 100;
  McmcConfig paper_mcmc{10000, 2000, 10, 20, 0.01, true, 0};
};

/// Parses the scenario JSON; unknown keys are rejected.
Scenario load_scenario(const std::string& path);

/// Draws each patient's latent trajectory from the true GP over weeks
/// 1..n_weeks, adds the true mean, thresholds at a_h.
TrialDataset generate_outcomes(const ScenarioTruth& truth, int patients_per_arm,
                               int n_weeks, Rng& rng);

enum class TrialOutcome { StoppedSuperior, StoppedFutile, NoEarlyStop };

const char* trial_outcome_name(TrialOutcome o);

struct TrialRecord {
  int replicate = 0;
  int stop_week = 0;
  TrialOutcome outcome = TrialOutcome::NoEarlyStop;
  double eta_final = 0.0;
  int enrolled_arm1 = 0;
  int enrolled_arm2 = 0;
};

/// One sequential trial: weekly accrual, weekly interim fits from
/// first_interim_week on, stop at the first non-continue verdict.
TrialRecord run_trial(const ScenarioTruth& truth, const TrialDesign& design,
                      std::uint64_t seed, int replicate_index = 0);

struct OperatingCharacteristics {
  double avg_duration_weeks = 0.0;
  double max_duration_weeks = 0.0;
  double avg_patients_per_arm = 0.0;
  double superiority_rate = 0.0;
  double futility_rate = 0.0;
  double no_stop_rate = 0.0;
  long replicates = 0;
};

OperatingCharacteristics operating_characteristics(
    const std::vector<TrialRecord>& records);

struct SimOptions {
  std::uint64_t seed = 20240915;
  int replicates_override = 0;  // 0 = scenario default
  bool paper_scale = false;
  long iters_override = 0;
  long burn_in_override = -1;
  int thin_override = 0;
  int threads = 0;  // 0 = hardware concurrency
  bool verbose = false;
};

/// Runs the replicate trials (in parallel when threads permit; deterministic
/// per-replicate seeds) and aggregates.
OperatingCharacteristics simulate_trials(const Scenario& scenario,
                                         const SimOptions& options,
                                         std::vector<TrialRecord>* records_out);

void write_trials_csv(const std::vector<TrialRecord>& records,
                      const std::string& path);

void write_oc_csv(const OperatingCharacteristics& oc, const std::string& path);

/// Weekly grid of the true mean functions (`arm,week,mu`).
void write_true_mean_csv(const ScenarioTruth& truth, const std::string& path);

}  // namespace lgp
