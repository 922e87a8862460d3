#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "lgp/kernels.hpp"
#include "lgp/rng.hpp"

namespace lgp {

/// Symmetric positive-definite covariance matrix with its lower Cholesky
/// factor and log-determinant. Solves go through the factor; the explicit
/// inverse is only materialized where trace terms need it.
class CovMatrix {
 public:
  /// Factorizes `values`; throws NumericalError naming the offending leading
  /// minor if the matrix is not positive definite.
  static CovMatrix from_dense(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  double logdet() const { return logdet_; }
  int dim() const { return static_cast<int>(values_.rows()); }

  /// C^{-1} x via two triangular solves.
  Eigen::VectorXd solve(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd inverse() const;

  /// x' C^{-1} x.
  double quad_form(const Eigen::VectorXd& x) const;

 private:
  Eigen::MatrixXd values_;
  Eigen::MatrixXd chol_;
  double logdet_ = 0.0;
};

/// Lower Cholesky factor of a dense SPD matrix. Throws NumericalError with
/// the index of the first non-positive pivot on failure.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a);

Eigen::MatrixXd cov_values(const std::vector<double>& times, KernelType kernel,
                           const KernelParams& p);

CovMatrix build_cov(const std::vector<double>& times, KernelType kernel,
                    const KernelParams& p);

/// mean + L z with z iid standard normal.
Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const CovMatrix& cov,
                           Rng& rng);

struct GpConditional {
  Eigen::VectorXd mean;
  CovMatrix cov;
};

/// Gaussian conditioning of the GP at `new_times` given exact observations
/// `obs_values` at `obs_times`. Empty observations return the prior.
GpConditional gp_conditional(const std::vector<double>& obs_times,
                             const Eigen::VectorXd& obs_values,
                             const std::vector<double>& new_times,
                             const std::function<double(double)>& mean_at,
                             KernelType kernel, const KernelParams& p);

}  // namespace lgp
