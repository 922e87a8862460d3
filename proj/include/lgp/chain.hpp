#pragma once

#include <cstdint>
#include <vector>

#include "lgp/model.hpp"
#include "lgp/rng.hpp"

namespace lgp {

struct McmcConfig {
  long n_iters = 10000;
  long burn_in = 2000;
  int thin = 10;
  int hmc_steps = 20;     // leapfrog count L
  double hmc_eps = 0.01;  // epsilon_0, adapted during burn-in then frozen
  bool adapt_eps = true;
  std::uint64_t seed = 20240915;
};

void validate_mcmc(const McmcConfig& config);

struct Draw {
  std::array<ArmMeanModel, 2> arm_mean;
  KernelParams kernel;
  std::vector<Eigen::VectorXd> latent;
};

struct PosteriorDraws {
  std::vector<Draw> draws;
  TrialDataset data;  // snapshot of the fitted dataset
  PriorConfig prior;
  McmcConfig config;
  double hmc_acceptance = 0.0;  // post burn-in
  double hmc_eps_final = 0.0;

  std::size_t count() const { return draws.size(); }
};

/// Full sweep of Section-2.2 transitions: truncated-normal Gibbs over every
/// patient's latent vector, marginalized multinomial degree and conjugate MVN
/// coefficient draws per arm, then one hybrid Monte Carlo update of theta.
/// Deterministic given config.seed.
PosteriorDraws run_chain(const TrialDataset& data, const PriorConfig& prior,
                         const McmcConfig& config);

// --- single transitions, exposed for tests and diagnostics ---

/// Geweke cycle through one patient's latent components; each conditional is
/// a univariate normal truncated to the side prescribed by the outcome.
Eigen::VectorXd gibbs_update_latent(const LatentState& state, int patient_index,
                                    const TrialDataset& data,
                                    const PriorConfig& prior, Rng& rng);

/// In-place cycle given the patient's precision matrix and mean vector.
void gibbs_cycle(Eigen::VectorXd& latent, const std::vector<int>& outcomes,
                 const Eigen::VectorXd& mean, const Eigen::MatrixXd& precision,
                 double threshold, Rng& rng);

/// Unnormalized log weights of P(m = h | a, theta), h = 0..M, marginalized
/// over beta.
std::vector<double> degree_log_weights(int arm, const LatentState& state,
                                       const TrialDataset& data,
                                       const PriorConfig& prior);

int sample_degree(int arm, const LatentState& state, const TrialDataset& data,
                  const PriorConfig& prior, Rng& rng);

Eigen::VectorXd sample_beta(int arm, int degree, const LatentState& state,
                            const TrialDataset& data, const PriorConfig& prior,
                            Rng& rng);

struct HmcThetaResult {
  KernelParams theta;
  bool accepted = false;
};

HmcThetaResult hmc_update_theta(const LatentState& state,
                               const TrialDataset& data,
                               const PriorConfig& prior,
                               const McmcConfig& config, Rng& rng);

struct EssResult {
  double ess = 0.0;
  bool constant = false;
  std::vector<double> autocorr;  // lags 1..max_lag
};

/// Effective sample size via Geyer's initial-positive-sequence truncation.
EssResult ess_diagnostic(const std::vector<double>& series, int max_lag = 50);

/// Long-format trace CSV (`iter,param,value`) of the retained draws.
void write_trace_csv(const PosteriorDraws& draws, const std::string& path);

/// Per-parameter ESS with a constant-series flag (`param,ess,constant`).
void write_diagnostics_csv(const PosteriorDraws& draws, const std::string& path);

/// Per-parameter autocorrelations up to max_lag (`param,lag,value`).
void write_autocorr_csv(const PosteriorDraws& draws, const std::string& path,
                        int max_lag = 50);

/// Scalar series of one parameter across retained draws. Coefficients beyond
/// a draw's degree are zero (mu(t) has no such term in that draw).
std::vector<double> parameter_series(const PosteriorDraws& draws,
                                     const std::string& param);

std::vector<std::string> parameter_names(const PosteriorDraws& draws);

}  // namespace lgp
