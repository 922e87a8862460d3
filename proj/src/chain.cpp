#include "lgp/chain.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "lgp/errors.hpp"
#include "lgp/hmc.hpp"
#include "lgp/stats.hpp"

namespace lgp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

struct GridFactors {
  Eigen::MatrixXd chol;      // lower factor of C
  Eigen::MatrixXd prec;      // C^{-1}
  Eigen::MatrixXd xt_cinv;   // X' C^{-1}, (M+1) x K
  Eigen::MatrixXd xt_cinv_x; // X' C^{-1} X, (M+1) x (M+1)
};

std::vector<GridFactors> factorize_grids(const GridIndex& index,
                                         const KernelParams& theta) {
  std::vector<GridFactors> out(index.grids.size());
  for (std::size_t g = 0; g < index.grids.size(); ++g) {
    const TimeGrid& grid = index.grids[g];
    const int k = static_cast<int>(grid.times.size());
    GridFactors f;
    f.chol = cholesky_lower(cov_values(grid.times, KernelType::Periodic, theta));
    f.prec = f.chol.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(k, k));
    f.prec = f.chol.transpose().triangularView<Eigen::Upper>().solve(f.prec);
    f.xt_cinv = grid.design.transpose() * f.prec;
    f.xt_cinv_x = f.xt_cinv * grid.design;
    out[g] = std::move(f);
  }
  return out;
}

// Sum_j X' C^{-1} X and Sum_j X' C^{-1} a_j over one arm's patients, at the
// full degree M; degree-h quantities are the leading blocks.
struct ArmSuffStats {
  Eigen::MatrixXd gram;  // (M+1) x (M+1)
  Eigen::VectorXd xa;    // (M+1)
  int n_patients = 0;
};

ArmSuffStats assemble_arm(int arm, const GridIndex& index,
                          const std::vector<GridFactors>& factors,
                          const LatentState& state, const TrialDataset& data,
                          int max_degree) {
  ArmSuffStats s;
  s.gram = Eigen::MatrixXd::Zero(max_degree + 1, max_degree + 1);
  s.xa = Eigen::VectorXd::Zero(max_degree + 1);
  for (std::size_t g = 0; g < index.grids.size(); ++g) {
    const TimeGrid& grid = index.grids[g];
    int n_arm = 0;
    Eigen::VectorXd a_sum = Eigen::VectorXd::Zero(grid.times.size());
    for (int j : grid.patient_idx) {
      if (data.patients[j].arm != arm) continue;
      ++n_arm;
      a_sum += state.latent[j];
    }
    if (n_arm == 0) continue;
    s.gram += n_arm * factors[g].xt_cinv_x;
    s.xa += factors[g].xt_cinv * a_sum;
    s.n_patients += n_arm;
  }
  return s;
}

// log P(m = h | a, theta) up to a shared constant, for h = 0..M.
std::vector<double> degree_log_weights_from(const ArmSuffStats& stats,
                                            const PriorConfig& prior) {
  const double sigma0_sq = prior.beta_prior_var;
  const double mu0 = prior.beta_prior_mean;
  const double log_prior_m = -std::log(static_cast<double>(prior.max_degree + 1));
  std::vector<double> logw(prior.max_degree + 1);
  for (int h = 0; h <= prior.max_degree; ++h) {
    const int dim = h + 1;
    Eigen::MatrixXd a_inv = stats.gram.topLeftCorner(dim, dim);
    a_inv.diagonal().array() += 1.0 / sigma0_sq;
    Eigen::VectorXd b = stats.xa.head(dim);
    b.array() += mu0 / sigma0_sq;
    const Eigen::MatrixXd l = cholesky_lower(a_inv);
    const double logdet_a = -2.0 * l.diagonal().array().log().sum();
    const double quad =
        l.triangularView<Eigen::Lower>().solve(b).squaredNorm();  // b' A b
    logw[h] = log_prior_m + 0.5 * logdet_a - 0.5 * dim * std::log(sigma0_sq) +
              0.5 * quad - 0.5 * dim * mu0 * mu0 / sigma0_sq;
  }
  return logw;
}

int sample_degree_from(const std::vector<double>& logw, Rng& rng) {
  double max_lw = -kInf;
  for (double lw : logw) max_lw = std::max(max_lw, lw);
  if (!std::isfinite(max_lw))
    throw NumericalError("degree weights are all non-finite");
  double total = 0.0;
  std::vector<double> w(logw.size());
  for (std::size_t h = 0; h < logw.size(); ++h) {
    w[h] = std::exp(logw[h] - max_lw);
    total += w[h];
  }
  const double u = rng.uniform() * total;
  double cum = 0.0;
  for (std::size_t h = 0; h < w.size(); ++h) {
    cum += w[h];
    if (u <= cum) return static_cast<int>(h);
  }
  return static_cast<int>(w.size()) - 1;
}

Eigen::VectorXd sample_beta_from(const ArmSuffStats& stats, int degree,
                                 const PriorConfig& prior, Rng& rng) {
  const int dim = degree + 1;
  Eigen::MatrixXd a_inv = stats.gram.topLeftCorner(dim, dim);
  a_inv.diagonal().array() += 1.0 / prior.beta_prior_var;
  Eigen::VectorXd b = stats.xa.head(dim);
  b.array() += prior.beta_prior_mean / prior.beta_prior_var;
  const Eigen::MatrixXd l = cholesky_lower(a_inv);
  Eigen::VectorXd mean = l.triangularView<Eigen::Lower>().solve(b);
  mean = l.transpose().triangularView<Eigen::Upper>().solve(mean);
  Eigen::VectorXd z(dim);
  for (int i = 0; i < dim; ++i) z[i] = rng.normal();
  // cov(L^{-T} z) = (L L')^{-1} = A
  return mean + l.transpose().triangularView<Eigen::Upper>().solve(z);
}

KernelParams theta_from_vec(const Eigen::VectorXd& x, double jitter) {
  KernelParams p;
  p.theta1 = x[0];
  p.r = x[1];
  p.theta2 = x[2];
  p.jitter = jitter;
  return p;
}

HmcThetaResult hmc_theta_step(const GridIndex& index,
                              const std::vector<Eigen::MatrixXd>& residuals,
                              const KernelParams& current,
                              const PriorConfig& prior, int steps, double eps,
                              Rng& rng) {
  const double jitter = current.jitter;
  Eigen::VectorXd x(3);
  x << current.theta1, current.r, current.theta2;
  const auto energy_fn = [&](const Eigen::VectorXd& q) {
    return theta_energy(index, residuals, theta_from_vec(q, jitter), prior);
  };
  const auto grad_fn = [&](const Eigen::VectorXd& q) {
    return Eigen::VectorXd(
        theta_energy_grad(index, residuals, theta_from_vec(q, jitter), prior));
  };
  const auto ok = [](const Eigen::VectorXd& q) {
    return std::fabs(q[2]) >= kTheta2Floor;
  };
  const HmcStepResult step = hmc_step(x, energy_fn, grad_fn, steps, eps, rng, ok);
  return {theta_from_vec(step.position, jitter), step.accepted};
}

}  // namespace

void validate_mcmc(const McmcConfig& config) {
  if (config.n_iters < 1) throw ValidationError("n_iters must be >= 1");
  if (config.burn_in < 0 || config.burn_in >= config.n_iters)
    throw ValidationError("burn_in must lie in [0, n_iters)");
  if (config.thin < 1) throw ValidationError("thin must be >= 1");
  if (config.hmc_steps < 1) throw ValidationError("hmc_steps must be >= 1");
  if (!(config.hmc_eps > 0.0)) throw ValidationError("hmc_eps must be > 0");
}

void gibbs_cycle(Eigen::VectorXd& latent, const std::vector<int>& outcomes,
                 const Eigen::VectorXd& mean, const Eigen::MatrixXd& precision,
                 double threshold, Rng& rng) {
  const int k = static_cast<int>(latent.size());
  Eigen::VectorXd diff = latent - mean;
  for (int i = 0; i < k; ++i) {
    const double pii = precision(i, i);
    const double cond_var = 1.0 / pii;
    const double s = precision.row(i).dot(diff) - pii * diff[i];
    const double cond_mean = mean[i] - cond_var * s;
    const double cond_sd = std::sqrt(cond_var);
    latent[i] = outcomes[i] == 1
                    ? sample_truncnorm(cond_mean, cond_sd, threshold, kInf, rng)
                    : sample_truncnorm(cond_mean, cond_sd, -kInf, threshold, rng);
    diff[i] = latent[i] - mean[i];
  }
}

Eigen::VectorXd gibbs_update_latent(const LatentState& state, int patient_index,
                                    const TrialDataset& data,
                                    const PriorConfig& prior, Rng& rng) {
  const PatientSeries& patient = data.patients.at(patient_index);
  const std::vector<double> times = model_times(patient, data.time_scale);
  const CovMatrix cov = CovMatrix::from_dense(cov_values(times, KernelType::Periodic, state.kernel));
  const Eigen::MatrixXd prec = cov.inverse();
  const ArmMeanModel& mean_model = state.mean_for_arm(patient.arm);
  Eigen::VectorXd mean(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    mean[static_cast<int>(i)] = poly_mean(mean_model, times[i]);
  Eigen::VectorXd updated = state.latent.at(patient_index);
  gibbs_cycle(updated, patient.outcomes, mean, prec, prior.threshold, rng);
  return updated;
}

std::vector<double> degree_log_weights(int arm, const LatentState& state,
                                       const TrialDataset& data,
                                       const PriorConfig& prior) {
  const GridIndex index = GridIndex::build(data, prior.max_degree);
  const std::vector<GridFactors> factors = factorize_grids(index, state.kernel);
  return degree_log_weights_from(
      assemble_arm(arm, index, factors, state, data, prior.max_degree), prior);
}

int sample_degree(int arm, const LatentState& state, const TrialDataset& data,
                  const PriorConfig& prior, Rng& rng) {
  return sample_degree_from(degree_log_weights(arm, state, data, prior), rng);
}

Eigen::VectorXd sample_beta(int arm, int degree, const LatentState& state,
                            const TrialDataset& data, const PriorConfig& prior,
                            Rng& rng) {
  const GridIndex index = GridIndex::build(data, prior.max_degree);
  const std::vector<GridFactors> factors = factorize_grids(index, state.kernel);
  return sample_beta_from(
      assemble_arm(arm, index, factors, state, data, prior.max_degree), degree,
      prior, rng);
}

HmcThetaResult hmc_update_theta(const LatentState& state,
                               const TrialDataset& data,
                               const PriorConfig& prior,
                               const McmcConfig& config, Rng& rng) {
  const int deg = std::max(state.arm_mean[0].degree, state.arm_mean[1].degree);
  const GridIndex index = GridIndex::build(data, deg);
  const std::vector<Eigen::MatrixXd> residuals = grid_residuals(index, state, data);
  return hmc_theta_step(index, residuals, state.kernel, prior, config.hmc_steps,
                        config.hmc_eps, rng);
}

PosteriorDraws run_chain(const TrialDataset& data, const PriorConfig& prior,
                         const McmcConfig& config) {
  validate_dataset(data);
  validate_prior(prior);
  validate_mcmc(config);

  Rng rng(config.seed);
  const int n_patients = static_cast<int>(data.patients.size());
  const GridIndex index = GridIndex::build(data, prior.max_degree);

  LatentState state;
  state.kernel = KernelParams{1.0, 1.0, 1.0, 0.1};
  state.latent.resize(n_patients);
  for (int j = 0; j < n_patients; ++j) {
    const PatientSeries& p = data.patients[j];
    Eigen::VectorXd a(p.weeks.size());
    for (std::size_t k = 0; k < p.weeks.size(); ++k)
      a[static_cast<int>(k)] =
          p.outcomes[k] == 1 ? prior.threshold + 0.5 : prior.threshold - 0.5;
    state.latent[j] = std::move(a);
  }

  // Initial mean models: degree min(1, M), least squares on the feasible
  // starting latents; prior mean when an arm has no patients.
  const int init_deg = std::min(1, prior.max_degree);
  for (int arm = 1; arm <= 2; ++arm) {
    ArmMeanModel& mean = state.mean_for_arm(arm);
    mean.degree = init_deg;
    mean.beta = Eigen::VectorXd::Constant(init_deg + 1, prior.beta_prior_mean);
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(init_deg + 1, init_deg + 1);
    Eigen::VectorXd xta = Eigen::VectorXd::Zero(init_deg + 1);
    bool any = false;
    for (std::size_t g = 0; g < index.grids.size(); ++g) {
      const TimeGrid& grid = index.grids[g];
      const Eigen::MatrixXd x = grid.design.leftCols(init_deg + 1);
      for (int j : grid.patient_idx) {
        if (data.patients[j].arm != arm) continue;
        xtx += x.transpose() * x;
        xta += x.transpose() * state.latent[j];
        any = true;
      }
    }
    if (any) {
      xtx.diagonal().array() += 1e-8;
      mean.beta = xtx.ldlt().solve(xta);
    }
  }

  std::vector<GridFactors> factors = factorize_grids(index, state.kernel);

  double eps = config.hmc_eps;
  constexpr int kAdaptWindow = 25;
  int window_total = 0, window_accepted = 0;
  long post_total = 0, post_accepted = 0;

  PosteriorDraws out;
  out.data = data;
  out.prior = prior;
  out.config = config;
  const long n_retained = (config.n_iters - config.burn_in) / config.thin;
  out.draws.reserve(static_cast<std::size_t>(std::max(0L, n_retained)));

  for (long iter = 1; iter <= config.n_iters; ++iter) {
    try {
      // Latent vectors: cycle of truncated-normal Gibbs steps per patient.
      for (std::size_t g = 0; g < index.grids.size(); ++g) {
        const TimeGrid& grid = index.grids[g];
        Eigen::VectorXd mean_by_arm[2];
        for (int arm = 1; arm <= 2; ++arm) {
          const ArmMeanModel& m = state.mean_for_arm(arm);
          mean_by_arm[arm - 1] = grid.design.leftCols(m.degree + 1) * m.beta;
        }
        for (int j : grid.patient_idx) {
          gibbs_cycle(state.latent[j], data.patients[j].outcomes,
                      mean_by_arm[data.patients[j].arm - 1], factors[g].prec,
                      prior.threshold, rng);
        }
      }

      // Degree (marginalized over beta) then coefficients, per arm.
      for (int arm = 1; arm <= 2; ++arm) {
        const ArmSuffStats stats =
            assemble_arm(arm, index, factors, state, data, prior.max_degree);
        const int m = sample_degree_from(degree_log_weights_from(stats, prior), rng);
        ArmMeanModel& mean = state.mean_for_arm(arm);
        mean.degree = m;
        mean.beta = sample_beta_from(stats, m, prior, rng);
      }

      // Kernel hyperparameters via hybrid Monte Carlo.
      const std::vector<Eigen::MatrixXd> residuals =
          grid_residuals(index, state, data);
      const HmcThetaResult hmc = hmc_theta_step(index, residuals, state.kernel,
                                                prior, config.hmc_steps, eps, rng);
      if (hmc.accepted) {
        state.kernel = hmc.theta;
        factors = factorize_grids(index, state.kernel);
      }

      if (iter <= config.burn_in) {
        if (config.adapt_eps) {
          ++window_total;
          window_accepted += hmc.accepted ? 1 : 0;
          if (window_total == kAdaptWindow) {
            const double rate = static_cast<double>(window_accepted) / window_total;
            if (rate > 0.9)
              eps = std::min(eps * 1.1, 5.0);
            else if (rate < 0.6)
              eps = std::max(eps * 0.9, 1e-6);
            window_total = 0;
            window_accepted = 0;
          }
        }
      } else {
        ++post_total;
        post_accepted += hmc.accepted ? 1 : 0;
        if ((iter - config.burn_in) % config.thin == 0) {
          Draw draw;
          draw.arm_mean = state.arm_mean;
          draw.kernel = state.kernel;
          draw.latent = state.latent;
          out.draws.push_back(std::move(draw));
        }
      }
    } catch (const NumericalError& err) {
      throw NumericalError("iteration " + std::to_string(iter) + ": " +
                           err.what());
    }
  }

  out.hmc_acceptance =
      post_total > 0 ? static_cast<double>(post_accepted) / post_total : 0.0;
  out.hmc_eps_final = eps;
  return out;
}

EssResult ess_diagnostic(const std::vector<double>& series, int max_lag) {
  const int n = static_cast<int>(series.size());
  if (n < 10) throw ValidationError("ess_diagnostic: need at least 10 draws");

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= n;
  std::vector<double> centered(series);
  for (double& v : centered) v -= mean;

  const auto autocov = [&](int lag) {
    double s = 0.0;
    for (int i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
    return s / n;
  };

  EssResult out;
  const double c0 = autocov(0);
  if (c0 <= 1e-20 * std::max(1.0, mean * mean)) {
    out.constant = true;
    out.ess = n;
    out.autocorr.assign(std::min(max_lag, n - 1), 0.0);
    return out;
  }

  for (int lag = 1; lag <= std::min(max_lag, n - 1); ++lag)
    out.autocorr.push_back(autocov(lag) / c0);

  // Geyer initial positive sequence over pair sums rho_{2t} + rho_{2t+1}.
  double tau = 0.0;
  for (int t = 0; 2 * t + 1 < n; ++t) {
    const double rho_even = t == 0 ? 1.0 : autocov(2 * t) / c0;
    const double rho_odd = autocov(2 * t + 1) / c0;
    const double pair = rho_even + rho_odd;
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau -= 1.0;
  tau = std::max(tau, 1.0);
  out.ess = n / tau;
  return out;
}

std::vector<std::string> parameter_names(const PosteriorDraws& draws) {
  std::vector<std::string> names{"theta1", "r", "theta2"};
  for (int arm = 1; arm <= 2; ++arm) {
    names.push_back("m" + std::to_string(arm));
    for (int d = 0; d <= draws.prior.max_degree; ++d)
      names.push_back("beta" + std::to_string(arm) + "_" + std::to_string(d));
  }
  return names;
}

std::vector<double> parameter_series(const PosteriorDraws& draws,
                                     const std::string& param) {
  std::vector<double> series;
  series.reserve(draws.draws.size());
  for (const Draw& d : draws.draws) {
    double v;
    if (param == "theta1") {
      v = d.kernel.theta1;
    } else if (param == "r") {
      v = d.kernel.r;
    } else if (param == "theta2") {
      v = d.kernel.theta2;
    } else if (param == "m1" || param == "m2") {
      v = d.arm_mean[param == "m1" ? 0 : 1].degree;
    } else if (param.rfind("beta", 0) == 0) {
      const std::size_t us = param.find('_');
      if (us == std::string::npos)
        throw LookupError("unknown parameter '" + param + "'");
      const int arm = std::stoi(param.substr(4, us - 4));
      const int deg = std::stoi(param.substr(us + 1));
      if (arm < 1 || arm > 2) throw LookupError("unknown parameter '" + param + "'");
      const ArmMeanModel& m = d.arm_mean[arm - 1];
      v = deg <= m.degree ? m.beta[deg] : 0.0;
    } else {
      throw LookupError("unknown parameter '" + param + "'");
    }
    series.push_back(v);
  }
  return series;
}

void write_trace_csv(const PosteriorDraws& draws, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "iter,param,value\n";
  const std::vector<std::string> names = parameter_names(draws);
  std::vector<std::vector<double>> series;
  series.reserve(names.size());
  for (const std::string& name : names) series.push_back(parameter_series(draws, name));
  for (std::size_t i = 0; i < draws.draws.size(); ++i) {
    const long iter = draws.config.burn_in + (static_cast<long>(i) + 1) * draws.config.thin;
    for (std::size_t p = 0; p < names.size(); ++p)
      out << iter << ',' << names[p] << ',' << series[p][i] << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_diagnostics_csv(const PosteriorDraws& draws, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "param,ess,constant\n";
  for (const std::string& name : parameter_names(draws)) {
    const EssResult r = ess_diagnostic(parameter_series(draws, name));
    out << name << ',' << r.ess << ',' << (r.constant ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_autocorr_csv(const PosteriorDraws& draws, const std::string& path,
                        int max_lag) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "param,lag,value\n";
  for (const std::string& name : parameter_names(draws)) {
    const EssResult r = ess_diagnostic(parameter_series(draws, name), max_lag);
    for (std::size_t lag = 1; lag <= r.autocorr.size(); ++lag)
      out << name << ',' << lag << ',' << r.autocorr[lag - 1] << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace lgp
