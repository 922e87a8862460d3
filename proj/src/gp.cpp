#include "lgp/gp.hpp"

#include <cmath>

#include "lgp/errors.hpp"

namespace lgp {

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NumericalError("cholesky: leading minor of order " +
                           std::to_string(j + 1) + " is not positive definite");
    }
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      const double s = a(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

CovMatrix CovMatrix::from_dense(Eigen::MatrixXd values) {
  CovMatrix m;
  m.chol_ = cholesky_lower(values);
  m.values_ = std::move(values);
  m.logdet_ = 2.0 * m.chol_.diagonal().array().log().sum();
  return m;
}

Eigen::VectorXd CovMatrix::solve(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = chol_.triangularView<Eigen::Lower>().solve(x);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd CovMatrix::solve(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd y = chol_.triangularView<Eigen::Lower>().solve(x);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd CovMatrix::inverse() const {
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim(), dim());
  return solve(identity);
}

double CovMatrix::quad_form(const Eigen::VectorXd& x) const {
  return chol_.triangularView<Eigen::Lower>().solve(x).squaredNorm();
}

Eigen::MatrixXd cov_values(const std::vector<double>& times, KernelType kernel,
                           const KernelParams& p) {
  const int n = static_cast<int>(times.size());
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = kernel_value(kernel, times[i], times[j], p);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

CovMatrix build_cov(const std::vector<double>& times, KernelType kernel,
                    const KernelParams& p) {
  if (times.empty()) throw ValidationError("build_cov: empty time grid");
  return CovMatrix::from_dense(cov_values(times, kernel, p));
}

Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mean, const CovMatrix& cov,
                           Rng& rng) {
  if (mean.size() != cov.dim())
    throw ValidationError("mvn_sample: dimension mismatch");
  Eigen::VectorXd z(mean.size());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + cov.chol() * z;
}

GpConditional gp_conditional(const std::vector<double>& obs_times,
                             const Eigen::VectorXd& obs_values,
                             const std::vector<double>& new_times,
                             const std::function<double(double)>& mean_at,
                             KernelType kernel, const KernelParams& p) {
  const int n = static_cast<int>(new_times.size());
  if (n == 0) throw ValidationError("gp_conditional: no prediction points");
  if (static_cast<int>(obs_times.size()) != obs_values.size())
    throw ValidationError("gp_conditional: obs size mismatch");

  Eigen::VectorXd mu_new(n);
  for (int i = 0; i < n; ++i) mu_new[i] = mean_at(new_times[i]);
  Eigen::MatrixXd c_nn = cov_values(new_times, kernel, p);

  if (obs_times.empty()) {
    GpConditional out;
    out.mean = std::move(mu_new);
    out.cov = CovMatrix::from_dense(std::move(c_nn));
    return out;
  }

  const int k = static_cast<int>(obs_times.size());
  CovMatrix c_oo = build_cov(obs_times, kernel, p);
  Eigen::MatrixXd c_on(k, n);  // cross covariance, no jitter across blocks
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j)
      c_on(i, j) = kernel_value(kernel, obs_times[i], new_times[j], p);

  Eigen::VectorXd mu_obs(k);
  for (int i = 0; i < k; ++i) mu_obs[i] = mean_at(obs_times[i]);

  const Eigen::MatrixXd w = c_oo.solve(c_on);  // C_oo^{-1} C_on
  GpConditional out;
  out.mean = mu_new + w.transpose() * (obs_values - mu_obs);
  Eigen::MatrixXd cc = c_nn - c_on.transpose() * w;
  cc = 0.5 * (cc + cc.transpose()).eval();  // kill round-off asymmetry
  out.cov = CovMatrix::from_dense(std::move(cc));
  return out;
}

}  // namespace lgp
