#include "lgp/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "lgp/errors.hpp"

namespace lgp {

bool TrialDataset::has_arm(int arm) const {
  return std::any_of(patients.begin(), patients.end(),
                     [arm](const PatientSeries& p) { return p.arm == arm; });
}

int TrialDataset::arm_patient_count(int arm) const {
  return static_cast<int>(
      std::count_if(patients.begin(), patients.end(),
                    [arm](const PatientSeries& p) { return p.arm == arm; }));
}

int TrialDataset::find_patient(int arm, const std::string& patient_id) const {
  for (int i = 0; i < static_cast<int>(patients.size()); ++i) {
    if (patients[i].arm == arm && patients[i].patient_id == patient_id) return i;
  }
  throw LookupError("unknown patient '" + patient_id + "' in arm " +
                    std::to_string(arm));
}

void validate_dataset(const TrialDataset& data) {
  if (data.patients.empty()) throw ValidationError("no patients");
  if (!(data.time_scale > 0.0))
    throw ValidationError("time_scale must be positive");
  for (const PatientSeries& p : data.patients) {
    if (p.arm != 1 && p.arm != 2)
      throw ValidationError("patient '" + p.patient_id + "': arm must be 1 or 2");
    if (p.weeks.empty())
      throw ValidationError("patient '" + p.patient_id + "': no observations");
    if (p.weeks.size() != p.outcomes.size())
      throw ValidationError("patient '" + p.patient_id +
                            "': weeks/outcomes length mismatch");
    for (std::size_t k = 0; k < p.weeks.size(); ++k) {
      if (p.weeks[k] < 1)
        throw ValidationError("patient '" + p.patient_id + "': week must be >= 1");
      if (p.weeks[k] > data.horizon_weeks)
        throw ValidationError("patient '" + p.patient_id + "': week " +
                              std::to_string(p.weeks[k]) + " beyond horizon " +
                              std::to_string(data.horizon_weeks));
      if (k > 0 && p.weeks[k] <= p.weeks[k - 1])
        throw ValidationError("patient '" + p.patient_id +
                              "': weeks not strictly increasing");
      if (p.outcomes[k] != 0 && p.outcomes[k] != 1)
        throw ValidationError("patient '" + p.patient_id + "', week " +
                              std::to_string(p.weeks[k]) +
                              ": outcome must be 0 or 1");
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_int(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                     " value '" + s + "'");
  }
}

}  // namespace

TrialDataset load_dataset(const std::string& path, int horizon_weeks) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("no patients");
  if (strip(line) != "arm,patient_id,week,outcome")
    throw ParseError("line 1: expected header 'arm,patient_id,week,outcome'");

  // (arm, id) -> week -> outcome; map keeps weeks sorted and exposes dups.
  std::map<std::pair<int, std::string>, std::map<int, int>> grouped;
  std::vector<std::pair<int, std::string>> order;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 4)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 4 fields, got " + std::to_string(f.size()));
    const int arm = parse_int(strip(f[0]), line_no, "arm");
    const std::string id = strip(f[1]);
    const int week = parse_int(strip(f[2]), line_no, "week");
    const int outcome = parse_int(strip(f[3]), line_no, "outcome");
    if (outcome != 0 && outcome != 1)
      throw ValidationError("line " + std::to_string(line_no) +
                            ": outcome must be 0 or 1");
    auto key = std::make_pair(arm, id);
    auto [it, inserted] = grouped.try_emplace(key);
    if (inserted) order.push_back(key);
    if (!it->second.emplace(week, outcome).second)
      throw ValidationError("line " + std::to_string(line_no) +
                            ": duplicate week " + std::to_string(week) +
                            " for patient '" + id + "'");
  }

  TrialDataset data;
  data.horizon_weeks = horizon_weeks;
  for (const auto& key : order) {
    PatientSeries p;
    p.arm = key.first;
    p.patient_id = key.second;
    for (const auto& [week, outcome] : grouped[key]) {
      p.weeks.push_back(week);
      p.outcomes.push_back(outcome);
    }
    data.patients.push_back(std::move(p));
  }
  validate_dataset(data);
  return data;
}

void save_dataset(const TrialDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "arm,patient_id,week,outcome\n";
  for (const PatientSeries& p : data.patients) {
    for (std::size_t k = 0; k < p.weeks.size(); ++k) {
      out << p.arm << ',' << p.patient_id << ',' << p.weeks[k] << ','
          << p.outcomes[k] << '\n';
    }
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<double> weeks_to_times(const std::vector<int>& weeks, double scale) {
  if (!(scale > 0.0)) throw ValidationError("time scale must be positive");
  std::vector<double> t(weeks.size());
  for (std::size_t i = 0; i < weeks.size(); ++i) t[i] = weeks[i] / scale;
  return t;
}

std::vector<double> model_times(const PatientSeries& series, double scale) {
  return weeks_to_times(series.weeks, scale);
}

TrialDataset truncate_weeks(const TrialDataset& data, int max_week) {
  TrialDataset out;
  out.horizon_weeks = data.horizon_weeks;
  out.time_scale = data.time_scale;
  for (const PatientSeries& p : data.patients) {
    PatientSeries q;
    q.arm = p.arm;
    q.patient_id = p.patient_id;
    for (std::size_t k = 0; k < p.weeks.size(); ++k) {
      if (p.weeks[k] <= max_week) {
        q.weeks.push_back(p.weeks[k]);
        q.outcomes.push_back(p.outcomes[k]);
      }
    }
    if (!q.weeks.empty()) out.patients.push_back(std::move(q));
  }
  return out;
}

}  // namespace lgp
