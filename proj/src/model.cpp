#include "lgp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lgp/errors.hpp"

namespace lgp {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;

double normal_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}
}  // namespace

void validate_prior(const PriorConfig& prior) {
  if (prior.max_degree < 0) throw ValidationError("max_degree must be >= 0");
  if (!(prior.beta_prior_var > 0.0))
    throw ValidationError("beta prior variance must be > 0");
  for (double v : prior.theta_prior_var)
    if (!(v > 0.0)) throw ValidationError("theta prior variances must be > 0");
}

Eigen::MatrixXd design_matrix(const std::vector<double>& times, int degree) {
  if (degree < 0) throw ValidationError("design_matrix: degree must be >= 0");
  const int k = static_cast<int>(times.size());
  Eigen::MatrixXd x(k, degree + 1);
  for (int i = 0; i < k; ++i) {
    double pw = 1.0;
    for (int d = 0; d <= degree; ++d) {
      x(i, d) = pw;
      pw *= times[i];
    }
  }
  return x;
}

double poly_mean(const ArmMeanModel& model, double t) {
  double v = 0.0;
  for (int d = model.degree; d >= 0; --d) v = v * t + model.beta[d];
  return v;
}

double log_theta_prior(const KernelParams& theta, const PriorConfig& prior) {
  const double th[3] = {theta.theta1, theta.r, theta.theta2};
  double lp = 0.0;
  for (int i = 0; i < 3; ++i)
    lp += normal_logpdf(th[i], prior.theta_prior_mean[i], prior.theta_prior_var[i]);
  return lp;
}

Eigen::Vector3d neg_log_theta_prior_grad(const KernelParams& theta,
                                         const PriorConfig& prior) {
  const double th[3] = {theta.theta1, theta.r, theta.theta2};
  Eigen::Vector3d g;
  for (int i = 0; i < 3; ++i)
    g[i] = (th[i] - prior.theta_prior_mean[i]) / prior.theta_prior_var[i];
  return g;
}

GridIndex GridIndex::build(const TrialDataset& data, int max_degree) {
  GridIndex index;
  index.patient_grid.resize(data.patients.size());
  std::map<std::vector<int>, int> seen;
  for (int j = 0; j < static_cast<int>(data.patients.size()); ++j) {
    const PatientSeries& p = data.patients[j];
    auto [it, inserted] = seen.try_emplace(p.weeks, static_cast<int>(index.grids.size()));
    if (inserted) {
      TimeGrid g;
      g.weeks = p.weeks;
      g.times = weeks_to_times(p.weeks, data.time_scale);
      g.design = design_matrix(g.times, max_degree);
      index.grids.push_back(std::move(g));
    }
    index.grids[it->second].patient_idx.push_back(j);
    index.patient_grid[j] = it->second;
  }
  return index;
}

std::vector<Eigen::MatrixXd> grid_residuals(const GridIndex& index,
                                            const LatentState& state,
                                            const TrialDataset& data) {
  std::vector<Eigen::MatrixXd> res(index.grids.size());
  for (std::size_t g = 0; g < index.grids.size(); ++g) {
    const TimeGrid& grid = index.grids[g];
    const int k = static_cast<int>(grid.times.size());
    Eigen::MatrixXd r(k, grid.patient_idx.size());
    for (std::size_t c = 0; c < grid.patient_idx.size(); ++c) {
      const int j = grid.patient_idx[c];
      const ArmMeanModel& mean = state.mean_for_arm(data.patients[j].arm);
      r.col(c) = state.latent[j] -
                 grid.design.leftCols(mean.degree + 1) * mean.beta;
    }
    res[g] = std::move(r);
  }
  return res;
}

double theta_energy(const GridIndex& index,
                    const std::vector<Eigen::MatrixXd>& residuals,
                    const KernelParams& theta, const PriorConfig& prior) {
  double e = 0.0;
  for (std::size_t g = 0; g < index.grids.size(); ++g) {
    const TimeGrid& grid = index.grids[g];
    const int n_patients = static_cast<int>(grid.patient_idx.size());
    if (n_patients == 0) continue;
    const Eigen::MatrixXd l = cholesky_lower(cov_values(grid.times, KernelType::Periodic, theta));
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const Eigen::MatrixXd y = l.triangularView<Eigen::Lower>().solve(residuals[g]);
    e += 0.5 * (y.squaredNorm() + n_patients * logdet);
  }
  return e - log_theta_prior(theta, prior);
}

Eigen::Vector3d theta_energy_grad(const GridIndex& index,
                                  const std::vector<Eigen::MatrixXd>& residuals,
                                  const KernelParams& theta,
                                  const PriorConfig& prior) {
  Eigen::Vector3d grad = neg_log_theta_prior_grad(theta, prior);
  for (std::size_t g = 0; g < index.grids.size(); ++g) {
    const TimeGrid& grid = index.grids[g];
    const int n_patients = static_cast<int>(grid.patient_idx.size());
    if (n_patients == 0) continue;
    const std::vector<double>& times = grid.times;
    const int k = static_cast<int>(times.size());

    Eigen::MatrixXd c(k, k), d1(k, k), dr(k, k), d2(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j <= i; ++j) {
        const PeriodicParts parts = periodic_parts(times[i], times[j], theta);
        const double v = periodic_value(parts, theta, i == j);
        const KernelGrad kg = periodic_grad(parts, theta, times[i], times[j]);
        c(i, j) = c(j, i) = v;
        d1(i, j) = d1(j, i) = kg.d_theta1;
        dr(i, j) = dr(j, i) = kg.d_r;
        d2(i, j) = d2(j, i) = kg.d_theta2;
      }
    }

    const Eigen::MatrixXd l = cholesky_lower(c);
    Eigen::MatrixXd cinv = l.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(k, k));
    cinv = l.transpose().triangularView<Eigen::Upper>().solve(cinv);

    Eigen::MatrixXd v = l.triangularView<Eigen::Lower>().solve(residuals[g]);
    v = l.transpose().triangularView<Eigen::Upper>().solve(v);
    const Eigen::MatrixXd outer = v * v.transpose();

    const double half_n = 0.5 * n_patients;
    grad[0] += -0.5 * d1.cwiseProduct(outer).sum() + half_n * d1.cwiseProduct(cinv).sum();
    grad[1] += -0.5 * dr.cwiseProduct(outer).sum() + half_n * dr.cwiseProduct(cinv).sum();
    grad[2] += -0.5 * d2.cwiseProduct(outer).sum() + half_n * d2.cwiseProduct(cinv).sum();
  }
  return grad;
}

double energy(const KernelParams& theta, const LatentState& state,
              const TrialDataset& data, const PriorConfig& prior) {
  const int deg = std::max(state.arm_mean[0].degree, state.arm_mean[1].degree);
  const GridIndex index = GridIndex::build(data, deg);
  return theta_energy(index, grid_residuals(index, state, data), theta, prior);
}

Eigen::Vector3d energy_grad(const KernelParams& theta, const LatentState& state,
                            const TrialDataset& data, const PriorConfig& prior) {
  const int deg = std::max(state.arm_mean[0].degree, state.arm_mean[1].degree);
  const GridIndex index = GridIndex::build(data, deg);
  return theta_energy_grad(index, grid_residuals(index, state, data), theta, prior);
}

double log_joint_latent(const LatentState& state, const TrialDataset& data,
                        const PriorConfig& prior) {
  if (state.latent.size() != data.patients.size())
    throw ValidationError("log_joint_latent: latent size mismatch");

  // Indicator likelihood: zero unless a > a_h exactly matches e = 1.
  for (std::size_t j = 0; j < data.patients.size(); ++j) {
    const PatientSeries& p = data.patients[j];
    if (state.latent[j].size() != static_cast<int>(p.weeks.size()))
      throw ValidationError("log_joint_latent: latent length mismatch");
    for (std::size_t k = 0; k < p.weeks.size(); ++k) {
      const bool above = state.latent[j][static_cast<int>(k)] > prior.threshold;
      if (above != (p.outcomes[k] == 1))
        return -std::numeric_limits<double>::infinity();
    }
  }

  const int deg = std::max(state.arm_mean[0].degree, state.arm_mean[1].degree);
  const GridIndex index = GridIndex::build(data, deg);
  const std::vector<Eigen::MatrixXd> res = grid_residuals(index, state, data);

  double lp = 0.0;
  for (std::size_t g = 0; g < index.grids.size(); ++g) {
    const TimeGrid& grid = index.grids[g];
    if (grid.patient_idx.empty()) continue;
    const int k = static_cast<int>(grid.times.size());
    const Eigen::MatrixXd l =
        cholesky_lower(cov_values(grid.times, KernelType::Periodic, state.kernel));
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const Eigen::MatrixXd y = l.triangularView<Eigen::Lower>().solve(res[g]);
    const double n_patients = static_cast<double>(grid.patient_idx.size());
    lp += -0.5 * y.squaredNorm() - 0.5 * n_patients * (logdet + k * kLog2Pi);
  }

  for (int arm = 1; arm <= 2; ++arm) {
    const ArmMeanModel& mean = state.mean_for_arm(arm);
    for (int d = 0; d <= mean.degree; ++d)
      lp += normal_logpdf(mean.beta[d], prior.beta_prior_mean, prior.beta_prior_var);
    lp += -std::log(static_cast<double>(prior.max_degree + 1));  // uniform P(m)
  }
  lp += log_theta_prior(state.kernel, prior);
  return lp;
}

std::vector<double> poly_real_roots(const Eigen::VectorXd& coeffs) {
  // Strip negligible leading coefficients.
  const double scale = coeffs.cwiseAbs().maxCoeff();
  int deg = static_cast<int>(coeffs.size()) - 1;
  if (scale == 0.0) return {};
  while (deg > 0 && std::fabs(coeffs[deg]) <= 1e-12 * scale) --deg;

  std::vector<double> roots;
  if (deg == 0) return roots;
  if (deg == 1) {
    roots.push_back(-coeffs[0] / coeffs[1]);
    return roots;
  }
  if (deg == 2) {
    const double a = coeffs[2], b = coeffs[1], c = coeffs[0];
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return roots;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    roots.push_back(q / a);
    roots.push_back(q != 0.0 ? c / q : q / a);
    return roots;
  }

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -coeffs[i] / coeffs[deg];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  constexpr double kImagTol = 1e-9;
  for (int i = 0; i < deg; ++i) {
    const std::complex<double> z = solver.eigenvalues()[i];
    if (std::fabs(z.imag()) <= kImagTol) roots.push_back(z.real());
  }
  return roots;
}

double ddr(const ArmMeanModel& model, double threshold, double horizon_t,
           double weeks_per_unit) {
  if (!(horizon_t > 0.0)) throw ValidationError("ddr: horizon must be > 0");
  Eigen::VectorXd shifted = model.beta;
  shifted[0] -= threshold;

  std::vector<double> cuts{0.0, horizon_t};
  for (double root : poly_real_roots(shifted))
    if (root > 0.0 && root < horizon_t) cuts.push_back(root);
  std::sort(cuts.begin(), cuts.end());

  double measure = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (poly_mean(model, mid) > threshold) measure += cuts[i + 1] - cuts[i];
  }
  return weeks_per_unit * measure;
}

double ddr_grid(const std::function<double(double)>& mean_at, double threshold,
                double horizon_t, double step, double weeks_per_unit) {
  if (!(horizon_t > 0.0) || !(step > 0.0))
    throw ValidationError("ddr_grid: horizon and step must be > 0");
  double measure = 0.0;
  for (double lo = 0.0; lo < horizon_t; lo += step) {
    const double hi = std::min(lo + step, horizon_t);
    if (mean_at(0.5 * (lo + hi)) > threshold) measure += hi - lo;
  }
  return weeks_per_unit * measure;
}

}  // namespace lgp
