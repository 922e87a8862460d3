#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "lgp/dataset.hpp"
#include "lgp/gp.hpp"
#include "lgp/kernels.hpp"

namespace lgp {

/// Polynomial mean of one arm: mu(t) = sum_d beta[d] t^d, degree = beta.size()-1.
struct ArmMeanModel {
  int degree = 0;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(1);
};

struct PriorConfig {
  int max_degree = 5;          // M
  double beta_prior_mean = 0;  // mu_0, broadcast over coefficients
  double beta_prior_var = 100.0;  // sigma_0^2
  // Order (theta1, r, theta2), matching the HMC position vector.
  std::array<double, 3> theta_prior_mean{0.0, 0.0, 0.0};
  std::array<double, 3> theta_prior_var{100.0, 100.0, 100.0};
  double threshold = 0.0;  // a_h
};

void validate_prior(const PriorConfig& prior);

/// All latent quantities of one MCMC state: per-patient latent vectors
/// (aligned with TrialDataset::patients), per-arm mean models, kernel params.
struct LatentState {
  std::vector<Eigen::VectorXd> latent;
  std::array<ArmMeanModel, 2> arm_mean;  // index arm-1
  KernelParams kernel;

  const ArmMeanModel& mean_for_arm(int arm) const { return arm_mean[arm - 1]; }
  ArmMeanModel& mean_for_arm(int arm) { return arm_mean[arm - 1]; }
};

/// K x (degree+1) Vandermonde matrix with row k = (1, t_k, ..., t_k^degree).
Eigen::MatrixXd design_matrix(const std::vector<double>& times, int degree);

double poly_mean(const ArmMeanModel& model, double t);

/// Gaussian log prior density of theta = (theta1, r, theta2).
double log_theta_prior(const KernelParams& theta, const PriorConfig& prior);

/// d(-log P(theta))/d(theta1, r, theta2).
Eigen::Vector3d neg_log_theta_prior_grad(const KernelParams& theta,
                                         const PriorConfig& prior);

/// Log of the joint density of (e, a, m, beta, theta): Gaussian latent terms,
/// beta/m/theta priors, and the indicator likelihood (0 when the constraints
/// a > a_h <=> e = 1 hold, -inf otherwise).
double log_joint_latent(const LatentState& state, const TrialDataset& data,
                        const PriorConfig& prior);

/// Potential energy for the kernel-hyperparameter HMC:
/// E = 1/2 sum_ij {res' C^{-1} res + log|C|} - log P(theta).
double energy(const KernelParams& theta, const LatentState& state,
              const TrialDataset& data, const PriorConfig& prior);

/// Gradient of `energy` w.r.t. (theta1, r, theta2).
Eigen::Vector3d energy_grad(const KernelParams& theta, const LatentState& state,
                            const TrialDataset& data, const PriorConfig& prior);

/// Real roots of a polynomial (ascending coefficients): closed forms through
/// degree 2, companion-matrix eigenvalues above. Imaginary parts below 1e-9
/// are treated as zero.
std::vector<double> poly_real_roots(const Eigen::VectorXd& coeffs);

/// Duration of disease remission: weeks_per_unit times the Lebesgue measure of
/// {t in [0, horizon_t] : mu(t) > threshold}, via root-finding and interval
/// sign analysis. Reported in weeks under the week/10 convention.
double ddr(const ArmMeanModel& model, double threshold, double horizon_t,
           double weeks_per_unit = 10.0);

/// Same measure evaluated on a fine grid; the independent cross-check for ddr
/// and the implementation route for non-polynomial means.
double ddr_grid(const std::function<double(double)>& mean_at, double threshold,
                double horizon_t, double step, double weeks_per_unit = 10.0);

// ---------------------------------------------------------------------------
// Shared machinery: patients grouped by identical week grids, so per-grid
// factorizations are done once per theta instead of once per patient.

struct TimeGrid {
  std::vector<int> weeks;
  std::vector<double> times;
  Eigen::MatrixXd design;        // K x (max_degree+1)
  std::vector<int> patient_idx;  // members, indices into dataset.patients
};

struct GridIndex {
  std::vector<TimeGrid> grids;
  std::vector<int> patient_grid;  // dataset patient -> grid index

  static GridIndex build(const TrialDataset& data, int max_degree);
};

/// Per-grid residual columns a_j - X_m beta_arm for every member patient.
std::vector<Eigen::MatrixXd> grid_residuals(const GridIndex& index,
                                            const LatentState& state,
                                            const TrialDataset& data);

double theta_energy(const GridIndex& index,
                    const std::vector<Eigen::MatrixXd>& residuals,
                    const KernelParams& theta, const PriorConfig& prior);

Eigen::Vector3d theta_energy_grad(const GridIndex& index,
                                  const std::vector<Eigen::MatrixXd>& residuals,
                                  const KernelParams& theta,
                                  const PriorConfig& prior);

}  // namespace lgp
