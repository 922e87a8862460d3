#pragma once

#include <string>
#include <vector>

#include "lgp/chain.hpp"

namespace lgp {

struct ForecastRequest {
  int arm = 1;
  std::string patient_id;
  std::vector<int> future_weeks;  // strictly beyond the last observed week
};

struct MonitorConfig {
  double delta_weeks = 2.0;  // superiority margin delta
  double xi_upper = 0.95;
  double xi_lower = 0.05;
};

void validate_monitor(const MonitorConfig& cfg);

enum class Verdict { StopSuperior, Continue, StopFutile };

const char* verdict_name(Verdict v);

struct MonitorDecision {
  double eta_hat = 0.0;
  Verdict verdict = Verdict::Continue;
};

/// Posterior predictive response probabilities q at each requested future
/// week: per retained draw, the GP conditional of the future latent values
/// given the imputed latent vector, thresholded through the Gaussian CDF,
/// averaged over draws.
std::vector<double> forecast_q(const PosteriorDraws& draws,
                               const ForecastRequest& req,
                               const TrialDataset& data,
                               const PriorConfig& prior);

/// Average of forecast_q at one week over every patient in the dataset.
double forecast_q_population_mean(const PosteriorDraws& draws, int week);

/// eta_hat = fraction of draws with T2 > T1 + delta, T computed by ddr on the
/// drawn (m, beta) over [0, horizon_t].
double estimate_eta(const PosteriorDraws& draws, const MonitorConfig& cfg,
                    double horizon_t);

/// Three-way stopping rule; boundary equality stops (>= xi_U, <= xi_L).
MonitorDecision monitor_decision(double eta_hat, const MonitorConfig& cfg);

/// Posterior mean DDR for one arm, in weeks.
double posterior_mean_ddr(const PosteriorDraws& draws, int arm);

/// Posterior proportion of degree m for one arm.
double degree_proportion(const PosteriorDraws& draws, int arm, int degree);

struct SummaryRow {
  int arm = 0;  // 0 = shared parameters
  std::string param;
  double mean = 0.0;
  double sd = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
};

/// Mean / sd / central 95% interval per parameter, posterior m proportions,
/// and posterior mean DDR per arm.
std::vector<SummaryRow> posterior_summary(const PosteriorDraws& draws);

void write_summary_csv(const PosteriorDraws& draws, const std::string& path);

void write_forecast_csv(const PosteriorDraws& draws,
                        const std::vector<int>& future_weeks,
                        const std::string& path);

/// Per-draw latent realizations for one patient (`draw,week,value,kind`),
/// imputed values at observed weeks plus conditional means at future weeks.
void write_latent_csv(const PosteriorDraws& draws, int arm,
                      const std::string& patient_id,
                      const std::vector<int>& future_weeks, int max_draws,
                      const std::string& path);

}  // namespace lgp
