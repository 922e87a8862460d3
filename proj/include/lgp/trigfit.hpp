#pragma once

#include "lgp/inference.hpp"

namespace lgp {

/// Fit variant with mean mu(t) = alpha + sin(beta0 pi t) and the
/// squared-exponential kernel, all four parameters (alpha, beta0, theta1, r)
/// updated jointly by HMC within the latent Gibbs sweep. Used to refit data
/// generated from a trigonometric mean; the polynomial machinery does not
/// apply here.
struct TrigFitConfig {
  double prior_var = 100.0;  // N(0, prior_var) on each parameter
  double threshold = 0.0;    // a_h
  double jitter = 0.1;
};

struct TrigParams {
  double alpha = 0.0;
  double beta0 = 1.0;
  double theta1 = 1.0;
  double r = 1.0;
};

struct TrigDraw {
  TrigParams params;
  std::vector<Eigen::VectorXd> latent;
};

struct TrigPosterior {
  std::vector<TrigDraw> draws;
  TrialDataset data;
  TrigFitConfig config;
  double hmc_acceptance = 0.0;
};

double trig_mean(const TrigParams& p, double t);

/// Energy of (alpha, beta0, theta1, r) given the latent state; exposed for
/// the finite-difference gradient check.
double trig_energy(const Eigen::VectorXd& x,
                   const std::vector<Eigen::VectorXd>& latent,
                   const TrialDataset& data, const TrigFitConfig& config);

Eigen::VectorXd trig_energy_grad(const Eigen::VectorXd& x,
                                 const std::vector<Eigen::VectorXd>& latent,
                                 const TrialDataset& data,
                                 const TrigFitConfig& config);

TrigPosterior run_chain_trig(const TrialDataset& data,
                             const TrigFitConfig& config,
                             const McmcConfig& mcmc);

/// Posterior predictive response probabilities under the trig fit.
std::vector<double> forecast_q_trig(const TrigPosterior& posterior,
                                    const ForecastRequest& req);

double forecast_q_population_mean_trig(const TrigPosterior& posterior, int week);

/// Posterior mean remission duration of the trig mean, by fine-grid measure.
double posterior_mean_ddr_trig(const TrigPosterior& posterior);

}  // namespace lgp
