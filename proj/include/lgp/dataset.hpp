#pragma once

#include <string>
#include <vector>

namespace lgp {

/// One patient's observed binary outcomes on a week grid.
struct PatientSeries {
  int arm = 1;  // 1 = standard/control, 2 = experimental
  std::string patient_id;
  std::vector<int> weeks;     // strictly increasing, 1..horizon
  std::vector<int> outcomes;  // 0/1, aligned with weeks
};

struct TrialDataset {
  std::vector<PatientSeries> patients;
  int horizon_weeks = 35;
  double time_scale = 10.0;  // model time t = week / time_scale

  bool has_arm(int arm) const;
  int arm_patient_count(int arm) const;
  /// Index of (arm, patient_id) in `patients`; throws LookupError if absent.
  int find_patient(int arm, const std::string& patient_id) const;
};

/// Validates invariants (week monotonicity, outcome domain, horizon bounds);
/// throws ValidationError on the first violation.
void validate_dataset(const TrialDataset& data);

/// Reads `arm,patient_id,week,outcome` CSV (header required), groups rows by
/// (arm, patient_id) and sorts each patient's rows by week.
TrialDataset load_dataset(const std::string& path, int horizon_weeks = 35);

void save_dataset(const TrialDataset& data, const std::string& path);

std::vector<double> weeks_to_times(const std::vector<int>& weeks, double scale);

std::vector<double> model_times(const PatientSeries& series, double scale);

/// Copy of the dataset keeping only observations with week <= max_week.
/// Patients left with no observations are dropped.
TrialDataset truncate_weeks(const TrialDataset& data, int max_week);

}  // namespace lgp
