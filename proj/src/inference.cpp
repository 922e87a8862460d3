#include "lgp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lgp/errors.hpp"
#include "lgp/stats.hpp"

namespace lgp {

void validate_monitor(const MonitorConfig& cfg) {
  if (!(cfg.delta_weeks >= 0.0)) throw ValidationError("delta must be >= 0");
  if (!(cfg.xi_lower >= 0.0 && cfg.xi_lower < cfg.xi_upper && cfg.xi_upper <= 1.0))
    throw ValidationError("need 0 <= xi_lower < xi_upper <= 1");
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::StopSuperior: return "stop_superior";
    case Verdict::Continue: return "continue";
    case Verdict::StopFutile: return "stop_futile";
  }
  return "?";
}

namespace {

std::vector<double> forecast_q_for_patient(const PosteriorDraws& draws,
                                           int patient_index,
                                           const std::vector<int>& future_weeks,
                                           const TrialDataset& data,
                                           const PriorConfig& prior) {
  const PatientSeries& patient = data.patients[patient_index];
  if (future_weeks.empty()) throw ValidationError("forecast: no future weeks");
  for (int w : future_weeks)
    if (w <= patient.weeks.back())
      throw ValidationError("forecast week " + std::to_string(w) +
                            " not beyond last observed week " +
                            std::to_string(patient.weeks.back()));
  if (draws.draws.empty()) throw ValidationError("forecast: no retained draws");

  const std::vector<double> obs_times = model_times(patient, data.time_scale);
  const std::vector<double> new_times = weeks_to_times(future_weeks, data.time_scale);

  std::vector<double> q(future_weeks.size(), 0.0);
  for (const Draw& d : draws.draws) {
    const ArmMeanModel& mean_model = d.arm_mean[patient.arm - 1];
    const auto mean_at = [&](double t) { return poly_mean(mean_model, t); };
    const GpConditional cond =
        gp_conditional(obs_times, d.latent[patient_index], new_times, mean_at,
                       KernelType::Periodic, d.kernel);
    for (std::size_t s = 0; s < q.size(); ++s) {
      const double sd = std::sqrt(cond.cov.values()(s, s));
      q[s] += 1.0 - normal_cdf((prior.threshold - cond.mean[s]) / sd);
    }
  }
  for (double& v : q) v /= static_cast<double>(draws.draws.size());
  return q;
}

double quantile(std::vector<double> sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double idx = p * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return (1.0 - frac) * sorted[lo] + frac * sorted[hi];
}

}  // namespace

std::vector<double> forecast_q(const PosteriorDraws& draws,
                               const ForecastRequest& req,
                               const TrialDataset& data,
                               const PriorConfig& prior) {
  const int idx = data.find_patient(req.arm, req.patient_id);
  return forecast_q_for_patient(draws, idx, req.future_weeks, data, prior);
}

double forecast_q_population_mean(const PosteriorDraws& draws, int week) {
  const TrialDataset& data = draws.data;
  double total = 0.0;
  for (int j = 0; j < static_cast<int>(data.patients.size()); ++j) {
    total += forecast_q_for_patient(draws, j, {week}, data, draws.prior)[0];
  }
  return total / static_cast<double>(data.patients.size());
}

double estimate_eta(const PosteriorDraws& draws, const MonitorConfig& cfg,
                    double horizon_t) {
  if (draws.draws.empty()) throw ValidationError("estimate_eta: no draws");
  long hits = 0;
  for (const Draw& d : draws.draws) {
    const double t1 = ddr(d.arm_mean[0], draws.prior.threshold, horizon_t);
    const double t2 = ddr(d.arm_mean[1], draws.prior.threshold, horizon_t);
    if (t2 > t1 + cfg.delta_weeks) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(draws.draws.size());
}

MonitorDecision monitor_decision(double eta_hat, const MonitorConfig& cfg) {
  if (!(eta_hat >= 0.0 && eta_hat <= 1.0))
    throw ValidationError("eta_hat must lie in [0, 1]");
  MonitorDecision d;
  d.eta_hat = eta_hat;
  if (eta_hat >= cfg.xi_upper)
    d.verdict = Verdict::StopSuperior;
  else if (eta_hat <= cfg.xi_lower)
    d.verdict = Verdict::StopFutile;
  else
    d.verdict = Verdict::Continue;
  return d;
}

double posterior_mean_ddr(const PosteriorDraws& draws, int arm) {
  if (draws.draws.empty()) throw ValidationError("no draws");
  const double horizon_t = draws.data.horizon_weeks / draws.data.time_scale;
  double total = 0.0;
  for (const Draw& d : draws.draws)
    total += ddr(d.arm_mean[arm - 1], draws.prior.threshold, horizon_t,
                 draws.data.time_scale);
  return total / static_cast<double>(draws.draws.size());
}

double degree_proportion(const PosteriorDraws& draws, int arm, int degree) {
  if (draws.draws.empty()) throw ValidationError("no draws");
  long hits = 0;
  for (const Draw& d : draws.draws)
    if (d.arm_mean[arm - 1].degree == degree) ++hits;
  return static_cast<double>(hits) / static_cast<double>(draws.draws.size());
}

std::vector<SummaryRow> posterior_summary(const PosteriorDraws& draws) {
  if (draws.draws.empty()) throw ValidationError("no draws");
  std::vector<SummaryRow> rows;

  const auto summarize = [&](int arm, const std::string& name,
                             const std::vector<double>& series) {
    SummaryRow row;
    row.arm = arm;
    row.param = name;
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(series.size());
    double var = 0.0;
    for (double v : series) var += (v - mean) * (v - mean);
    var = series.size() > 1 ? var / static_cast<double>(series.size() - 1) : 0.0;
    row.mean = mean;
    row.sd = std::sqrt(var);
    std::vector<double> sorted(series);
    std::sort(sorted.begin(), sorted.end());
    row.lo95 = quantile(sorted, 0.025);
    row.hi95 = quantile(sorted, 0.975);
    rows.push_back(row);
  };

  for (const std::string& name : {"theta1", "r", "theta2"})
    summarize(0, name, parameter_series(draws, name));

  const double horizon_t = draws.data.horizon_weeks / draws.data.time_scale;
  for (int arm = 1; arm <= 2; ++arm) {
    const std::string a = std::to_string(arm);
    summarize(arm, "m", parameter_series(draws, "m" + a));
    for (int d = 0; d <= draws.prior.max_degree; ++d)
      summarize(arm, "beta_" + std::to_string(d),
                parameter_series(draws, "beta" + a + "_" + std::to_string(d)));
    std::vector<double> ddr_series;
    ddr_series.reserve(draws.draws.size());
    for (const Draw& d : draws.draws)
      ddr_series.push_back(ddr(d.arm_mean[arm - 1], draws.prior.threshold,
                               horizon_t, draws.data.time_scale));
    summarize(arm, "ddr", ddr_series);
    for (int m = 0; m <= draws.prior.max_degree; ++m) {
      SummaryRow row;
      row.arm = arm;
      row.param = "m_prop_" + std::to_string(m);
      row.mean = degree_proportion(draws, arm, m);
      row.sd = 0.0;
      row.lo95 = row.hi95 = row.mean;
      rows.push_back(row);
    }
  }

  SummaryRow acc;
  acc.arm = 0;
  acc.param = "hmc_acceptance";
  acc.mean = draws.hmc_acceptance;
  acc.lo95 = acc.hi95 = draws.hmc_acceptance;
  rows.push_back(acc);
  return rows;
}

void write_summary_csv(const PosteriorDraws& draws, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "arm,param,mean,sd,lo95,hi95\n";
  for (const SummaryRow& row : posterior_summary(draws))
    out << row.arm << ',' << row.param << ',' << row.mean << ',' << row.sd
        << ',' << row.lo95 << ',' << row.hi95 << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_forecast_csv(const PosteriorDraws& draws,
                        const std::vector<int>& future_weeks,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "patient_id,week,q_hat\n";
  const TrialDataset& data = draws.data;
  for (int j = 0; j < static_cast<int>(data.patients.size()); ++j) {
    const std::vector<double> q =
        forecast_q_for_patient(draws, j, future_weeks, data, draws.prior);
    for (std::size_t s = 0; s < future_weeks.size(); ++s)
      out << data.patients[j].patient_id << ',' << future_weeks[s] << ','
          << q[s] << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_latent_csv(const PosteriorDraws& draws, int arm,
                      const std::string& patient_id,
                      const std::vector<int>& future_weeks, int max_draws,
                      const std::string& path) {
  const TrialDataset& data = draws.data;
  const int idx = data.find_patient(arm, patient_id);
  const PatientSeries& patient = data.patients[idx];
  const std::vector<double> obs_times = model_times(patient, data.time_scale);
  const std::vector<double> new_times =
      weeks_to_times(future_weeks, data.time_scale);

  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "draw,week,value,kind\n";
  const int n = std::min<int>(max_draws, static_cast<int>(draws.draws.size()));
  for (int b = 0; b < n; ++b) {
    const Draw& d = draws.draws[b];
    for (std::size_t k = 0; k < patient.weeks.size(); ++k)
      out << b << ',' << patient.weeks[k] << ','
          << d.latent[idx][static_cast<int>(k)] << ",imputed\n";
    if (!future_weeks.empty()) {
      const ArmMeanModel& mean_model = d.arm_mean[patient.arm - 1];
      const auto mean_at = [&](double t) { return poly_mean(mean_model, t); };
      const GpConditional cond =
          gp_conditional(obs_times, d.latent[idx], new_times, mean_at,
                         KernelType::Periodic, d.kernel);
      for (std::size_t s = 0; s < future_weeks.size(); ++s)
        out << b << ',' << future_weeks[s] << ',' << cond.mean[s]
            << ",predicted\n";
    }
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace lgp
