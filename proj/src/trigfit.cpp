#include "lgp/trigfit.hpp"

#include <cmath>

#include "lgp/errors.hpp"
#include "lgp/hmc.hpp"
#include "lgp/stats.hpp"

namespace lgp {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;

TrigParams params_from_vec(const Eigen::VectorXd& x) {
  return TrigParams{x[0], x[1], x[2], x[3]};
}

KernelParams sqexp_params(const TrigParams& p, double jitter) {
  KernelParams k;
  k.theta1 = p.theta1;
  k.theta2 = 1.0;  // unused by the squared-exponential kernel
  k.r = p.r;
  k.jitter = jitter;
  return k;
}

Eigen::VectorXd trig_mean_vector(const TrigParams& p,
                                 const std::vector<double>& times) {
  Eigen::VectorXd mu(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    mu[static_cast<Eigen::Index>(i)] = trig_mean(p, times[i]);
  return mu;
}
}  // namespace

double trig_mean(const TrigParams& p, double t) {
  return p.alpha + std::sin(p.beta0 * M_PI * t);
}

double trig_energy(const Eigen::VectorXd& x,
                   const std::vector<Eigen::VectorXd>& latent,
                   const TrialDataset& data, const TrigFitConfig& config) {
  const TrigParams p = params_from_vec(x);
  const KernelParams kp = sqexp_params(p, config.jitter);
  const GridIndex index = GridIndex::build(data, 0);

  double e = 0.0;
  for (const TimeGrid& grid : index.grids) {
    const Eigen::MatrixXd l =
        cholesky_lower(cov_values(grid.times, KernelType::SquaredExp, kp));
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const Eigen::VectorXd mu = trig_mean_vector(p, grid.times);
    for (int j : grid.patient_idx) {
      const Eigen::VectorXd y =
          l.triangularView<Eigen::Lower>().solve(latent[j] - mu);
      e += 0.5 * (y.squaredNorm() + logdet);
    }
  }
  for (int i = 0; i < 4; ++i)
    e += 0.5 * (x[i] * x[i] / config.prior_var + kLog2Pi +
                std::log(config.prior_var));
  return e;
}

Eigen::VectorXd trig_energy_grad(const Eigen::VectorXd& x,
                                 const std::vector<Eigen::VectorXd>& latent,
                                 const TrialDataset& data,
                                 const TrigFitConfig& config) {
  const TrigParams p = params_from_vec(x);
  const KernelParams kp = sqexp_params(p, config.jitter);
  const GridIndex index = GridIndex::build(data, 0);

  Eigen::VectorXd grad = x / config.prior_var;  // -d log P(x) / dx
  for (const TimeGrid& grid : index.grids) {
    const int k = static_cast<int>(grid.times.size());
    const int n_patients = static_cast<int>(grid.patient_idx.size());
    if (n_patients == 0) continue;

    Eigen::MatrixXd c(k, k), d_theta1(k, k), d_r(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j <= i; ++j) {
        const SqExpParts parts = sqexp_parts(grid.times[i], grid.times[j], kp);
        const double v = sqexp_value(parts, kp, i == j);
        const KernelGrad kg = sqexp_grad(parts, kp);
        c(i, j) = c(j, i) = v;
        d_theta1(i, j) = d_theta1(j, i) = kg.d_theta1;
        d_r(i, j) = d_r(j, i) = kg.d_r;
      }
    }
    const Eigen::MatrixXd l = cholesky_lower(c);
    Eigen::MatrixXd cinv = l.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXd::Identity(k, k));
    cinv = l.transpose().triangularView<Eigen::Upper>().solve(cinv);

    const Eigen::VectorXd mu = trig_mean_vector(p, grid.times);
    Eigen::VectorXd dmu_dbeta0(k);
    for (int i = 0; i < k; ++i)
      dmu_dbeta0[i] = M_PI * grid.times[i] * std::cos(p.beta0 * M_PI * grid.times[i]);

    Eigen::MatrixXd res(k, n_patients);
    for (int c_idx = 0; c_idx < n_patients; ++c_idx)
      res.col(c_idx) = latent[grid.patient_idx[c_idx]] - mu;
    Eigen::MatrixXd v = l.triangularView<Eigen::Lower>().solve(res);
    v = l.transpose().triangularView<Eigen::Upper>().solve(v);

    for (int c_idx = 0; c_idx < n_patients; ++c_idx) {
      grad[0] -= v.col(c_idx).sum();
      grad[1] -= v.col(c_idx).dot(dmu_dbeta0);
    }
    const Eigen::MatrixXd outer = v * v.transpose();
    const double half_n = 0.5 * n_patients;
    grad[2] += -0.5 * d_theta1.cwiseProduct(outer).sum() +
               half_n * d_theta1.cwiseProduct(cinv).sum();
    grad[3] += -0.5 * d_r.cwiseProduct(outer).sum() +
               half_n * d_r.cwiseProduct(cinv).sum();
  }
  return grad;
}

TrigPosterior run_chain_trig(const TrialDataset& data,
                             const TrigFitConfig& config,
                             const McmcConfig& mcmc) {
  validate_dataset(data);
  validate_mcmc(mcmc);
  if (!(config.prior_var > 0.0)) throw ValidationError("prior_var must be > 0");

  Rng rng(mcmc.seed);
  const GridIndex index = GridIndex::build(data, 0);
  const int n_patients = static_cast<int>(data.patients.size());

  std::vector<Eigen::VectorXd> latent(n_patients);
  for (int j = 0; j < n_patients; ++j) {
    const PatientSeries& pt = data.patients[j];
    Eigen::VectorXd a(pt.weeks.size());
    for (std::size_t k = 0; k < pt.weeks.size(); ++k)
      a[static_cast<Eigen::Index>(k)] =
          pt.outcomes[k] == 1 ? config.threshold + 0.5 : config.threshold - 0.5;
    latent[j] = std::move(a);
  }
  TrigParams params{0.0, 1.0, 1.0, 1.0};

  const auto factorize = [&](const TrigParams& p) {
    std::vector<Eigen::MatrixXd> prec(index.grids.size());
    const KernelParams kp = sqexp_params(p, config.jitter);
    for (std::size_t g = 0; g < index.grids.size(); ++g) {
      const int k = static_cast<int>(index.grids[g].times.size());
      const Eigen::MatrixXd l = cholesky_lower(
          cov_values(index.grids[g].times, KernelType::SquaredExp, kp));
      Eigen::MatrixXd ci = l.triangularView<Eigen::Lower>().solve(
          Eigen::MatrixXd::Identity(k, k));
      prec[g] = l.transpose().triangularView<Eigen::Upper>().solve(ci);
    }
    return prec;
  };
  std::vector<Eigen::MatrixXd> prec = factorize(params);

  double eps = mcmc.hmc_eps;
  constexpr int kAdaptWindow = 25;
  int window_total = 0, window_accepted = 0;
  long post_total = 0, post_accepted = 0;

  TrigPosterior out;
  out.data = data;
  out.config = config;

  for (long iter = 1; iter <= mcmc.n_iters; ++iter) {
    for (std::size_t g = 0; g < index.grids.size(); ++g) {
      const Eigen::VectorXd mu = trig_mean_vector(params, index.grids[g].times);
      for (int j : index.grids[g].patient_idx)
        gibbs_cycle(latent[j], data.patients[j].outcomes, mu, prec[g],
                    config.threshold, rng);
    }

    Eigen::VectorXd x(4);
    x << params.alpha, params.beta0, params.theta1, params.r;
    const auto energy_fn = [&](const Eigen::VectorXd& q) {
      return trig_energy(q, latent, data, config);
    };
    const auto grad_fn = [&](const Eigen::VectorXd& q) {
      return trig_energy_grad(q, latent, data, config);
    };
    const HmcStepResult step =
        hmc_step(x, energy_fn, grad_fn, mcmc.hmc_steps, eps, rng);
    if (step.accepted) {
      params = params_from_vec(step.position);
      prec = factorize(params);
    }

    if (iter <= mcmc.burn_in) {
      if (mcmc.adapt_eps) {
        ++window_total;
        window_accepted += step.accepted ? 1 : 0;
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
      post_accepted += step.accepted ? 1 : 0;
      if ((iter - mcmc.burn_in) % mcmc.thin == 0)
        out.draws.push_back(TrigDraw{params, latent});
    }
  }

  out.hmc_acceptance =
      post_total > 0 ? static_cast<double>(post_accepted) / post_total : 0.0;
  return out;
}

std::vector<double> forecast_q_trig(const TrigPosterior& posterior,
                                    const ForecastRequest& req) {
  const TrialDataset& data = posterior.data;
  const int idx = data.find_patient(req.arm, req.patient_id);
  const PatientSeries& patient = data.patients[idx];
  if (req.future_weeks.empty()) throw ValidationError("forecast: no future weeks");
  for (int w : req.future_weeks)
    if (w <= patient.weeks.back())
      throw ValidationError("forecast week not beyond last observation");
  if (posterior.draws.empty()) throw ValidationError("forecast: no draws");

  const std::vector<double> obs_times = model_times(patient, data.time_scale);
  const std::vector<double> new_times =
      weeks_to_times(req.future_weeks, data.time_scale);

  std::vector<double> q(req.future_weeks.size(), 0.0);
  for (const TrigDraw& d : posterior.draws) {
    const auto mean_at = [&](double t) { return trig_mean(d.params, t); };
    const GpConditional cond = gp_conditional(
        obs_times, d.latent[idx], new_times, mean_at, KernelType::SquaredExp,
        sqexp_params(d.params, posterior.config.jitter));
    for (std::size_t s = 0; s < q.size(); ++s) {
      const double sd = std::sqrt(cond.cov.values()(s, s));
      q[s] += 1.0 - normal_cdf((posterior.config.threshold - cond.mean[s]) / sd);
    }
  }
  for (double& v : q) v /= static_cast<double>(posterior.draws.size());
  return q;
}

double forecast_q_population_mean_trig(const TrigPosterior& posterior, int week) {
  const TrialDataset& data = posterior.data;
  double total = 0.0;
  for (const PatientSeries& p : data.patients) {
    ForecastRequest req{p.arm, p.patient_id, {week}};
    total += forecast_q_trig(posterior, req)[0];
  }
  return total / static_cast<double>(data.patients.size());
}

double posterior_mean_ddr_trig(const TrigPosterior& posterior) {
  if (posterior.draws.empty()) throw ValidationError("no draws");
  const double horizon_t =
      posterior.data.horizon_weeks / posterior.data.time_scale;
  double total = 0.0;
  for (const TrigDraw& d : posterior.draws) {
    const auto mean_at = [&](double t) { return trig_mean(d.params, t); };
    total += ddr_grid(mean_at, posterior.config.threshold, horizon_t, 1e-4,
                      posterior.data.time_scale);
  }
  return total / static_cast<double>(posterior.draws.size());
}

}  // namespace lgp
