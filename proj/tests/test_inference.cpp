#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lgp/errors.hpp"
#include "lgp/inference.hpp"
#include "lgp/simulate.hpp"
#include "lgp/stats.hpp"

using namespace lgp;

namespace {
ArmMeanModel make_mean(std::vector<double> beta) {
  ArmMeanModel m;
  m.degree = static_cast<int>(beta.size()) - 1;
  m.beta = Eigen::Map<Eigen::VectorXd>(beta.data(), beta.size());
  return m;
}

// Hand-built draw set over a one-patient dataset, latent values fixed.
PosteriorDraws manual_draws(const TrialDataset& data,
                            std::vector<std::array<ArmMeanModel, 2>> means) {
  PosteriorDraws out;
  out.data = data;
  out.prior = PriorConfig{};
  for (auto& m : means) {
    Draw d;
    d.arm_mean = m;
    d.kernel = {1.0, 3.5, 2.0, 0.1};
    for (const PatientSeries& p : data.patients) {
      Eigen::VectorXd a(p.weeks.size());
      for (std::size_t k = 0; k < p.weeks.size(); ++k)
        a[static_cast<int>(k)] = p.outcomes[k] == 1 ? 0.5 : -0.5;
      d.latent.push_back(a);
    }
    out.draws.push_back(std::move(d));
  }
  return out;
}

TrialDataset tiny_data() {
  TrialDataset data;
  data.patients.push_back(PatientSeries{1, "p1", {5, 10}, {1, 0}});
  return data;
}
}  // namespace

TEST_CASE("eta counts draws meeting the margin") {
  // T(beta) in weeks: intercept/slope chosen for exact root positions.
  const ArmMeanModel t20 = make_mean({-1.5, 1.0});  // above 0 past t = 1.5
  const ArmMeanModel t30 = make_mean({-0.5, 1.0});
  MonitorConfig cfg;  // delta = 2

  PosteriorDraws all_pass = manual_draws(tiny_data(), {{t20, t30}, {t20, t30}});
  CHECK(estimate_eta(all_pass, cfg, 3.5) == doctest::Approx(1.0));

  PosteriorDraws never = manual_draws(tiny_data(), {{t30, t30}, {t20, t20}});
  CHECK(estimate_eta(never, cfg, 3.5) == doctest::Approx(0.0));

  PosteriorDraws mixed = manual_draws(
      tiny_data(), {{t20, t30}, {t20, t30}, {t20, t30}, {t30, t20}});
  CHECK(estimate_eta(mixed, cfg, 3.5) == doctest::Approx(0.75));
}

TEST_CASE("eta is invariant under draw permutations") {
  const ArmMeanModel a = make_mean({-1.5, 1.0});
  const ArmMeanModel b = make_mean({-0.5, 1.0});
  PosteriorDraws draws = manual_draws(
      tiny_data(), {{a, b}, {b, a}, {a, a}, {a, b}, {b, b}});
  MonitorConfig cfg;
  const double before = estimate_eta(draws, cfg, 3.5);
  std::reverse(draws.draws.begin(), draws.draws.end());
  CHECK(estimate_eta(draws, cfg, 3.5) == doctest::Approx(before));
}

TEST_CASE("three-way decision rule with inclusive boundaries") {
  MonitorConfig cfg;
  CHECK(monitor_decision(0.96, cfg).verdict == Verdict::StopSuperior);
  CHECK(monitor_decision(0.95, cfg).verdict == Verdict::StopSuperior);
  CHECK(monitor_decision(0.5, cfg).verdict == Verdict::Continue);
  CHECK(monitor_decision(0.05, cfg).verdict == Verdict::StopFutile);
  CHECK(monitor_decision(0.049, cfg).verdict == Verdict::StopFutile);
  CHECK_THROWS_AS(monitor_decision(1.2, cfg), ValidationError);
  CHECK_THROWS_AS(validate_monitor(MonitorConfig{2.0, 0.05, 0.95}), ValidationError);
}

TEST_CASE("decision is monotone in eta") {
  MonitorConfig cfg;
  int last_rank = 0;  // futile=0, continue=1, superior=2
  for (double eta = 0.0; eta <= 1.0; eta += 0.01) {
    const Verdict v = monitor_decision(eta, cfg).verdict;
    const int rank = v == Verdict::StopFutile ? 0 : v == Verdict::Continue ? 1 : 2;
    REQUIRE(rank >= last_rank);
    last_rank = rank;
  }
}

TEST_CASE("forecast at a conditional mean equal to the threshold gives one half") {
  TrialDataset data;
  data.patients.push_back(PatientSeries{1, "p1", {10}, {0}});
  PosteriorDraws draws;
  draws.data = data;
  draws.prior = PriorConfig{};
  Draw d;
  d.arm_mean = {make_mean({0.0}), make_mean({0.0})};
  d.kernel = {1.0, 3.5, 2.0, 0.1};
  d.latent.push_back(Eigen::VectorXd::Zero(1));  // exactly at the threshold, e = 0
  draws.draws.push_back(d);

  ForecastRequest req{1, "p1", {20}};
  const std::vector<double> q = forecast_q(draws, req, data, draws.prior);
  CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("single-draw forecast matches monte-carlo thresholding") {
  TrialDataset data;
  data.patients.push_back(PatientSeries{1, "p1", {4, 11, 19}, {1, 0, 1}});
  PosteriorDraws draws;
  draws.data = data;
  draws.prior = PriorConfig{};
  Draw d;
  d.arm_mean = {make_mean({-0.2, 0.3}), make_mean({0.0})};
  d.kernel = {0.9, 3.2, 1.8, 0.1};
  Eigen::VectorXd latent(3);
  latent << 0.4, -0.6, 0.8;
  d.latent.push_back(latent);
  draws.draws.push_back(d);

  ForecastRequest req{1, "p1", {26}};
  const double q_impl = forecast_q(draws, req, data, draws.prior)[0];

  // Oracle: dense joint partition for the conditional law, then Monte Carlo
  // thresholding of draws from it.
  const std::vector<double> obs_times = model_times(data.patients[0], 10.0);
  const std::vector<double> all_times{obs_times[0], obs_times[1], obs_times[2], 2.6};
  const Eigen::MatrixXd joint = cov_values(all_times, KernelType::Periodic, d.kernel);
  Eigen::VectorXd mu(4);
  for (int i = 0; i < 4; ++i) mu[i] = poly_mean(d.arm_mean[0], all_times[i]);
  const Eigen::MatrixXd coo_inv = joint.topLeftCorner(3, 3).inverse();
  const Eigen::VectorXd con = joint.topRightCorner(3, 1);
  const double cmean = mu[3] + con.dot(coo_inv * (latent - mu.head(3)));
  const double cvar = joint(3, 3) - con.dot(coo_inv * con);
  Rng rng(1234);
  int hits = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i)
    if (cmean + std::sqrt(cvar) * rng.normal() > 0.0) ++hits;
  CHECK(q_impl == doctest::Approx(static_cast<double>(hits) / n).epsilon(0.005 / q_impl));
}

TEST_CASE("forecast probabilities stay in range and fall as the threshold rises") {
  TrialDataset data;
  data.patients.push_back(PatientSeries{1, "p1", {4, 11, 19}, {1, 0, 1}});
  PosteriorDraws draws;
  draws.data = data;
  draws.prior = PriorConfig{};
  Rng rng(42);
  for (int b = 0; b < 25; ++b) {
    Draw d;
    d.arm_mean = {make_mean({0.2 * rng.normal(), 0.1 * rng.normal()}),
                  make_mean({0.0})};
    d.kernel = {0.8 + 0.4 * rng.uniform(), 3.0 + rng.uniform(),
                1.5 + rng.uniform(), 0.1};
    Eigen::VectorXd latent(3);
    latent << 0.4, -0.6, 0.8;
    d.latent.push_back(latent);
    draws.draws.push_back(std::move(d));
  }
  ForecastRequest req{1, "p1", {21, 27, 33}};
  PriorConfig low = draws.prior;
  PriorConfig high = draws.prior;
  high.threshold = 0.5;
  const std::vector<double> q_low = forecast_q(draws, req, data, low);
  const std::vector<double> q_high = forecast_q(draws, req, data, high);
  for (std::size_t s = 0; s < q_low.size(); ++s) {
    REQUIRE(q_low[s] >= 0.0);
    REQUIRE(q_low[s] <= 1.0);
    REQUIRE(q_high[s] <= q_low[s]);
  }
}

TEST_CASE("forecast validates the request") {
  TrialDataset data = tiny_data();
  PosteriorDraws draws = manual_draws(data, {{make_mean({0.0}), make_mean({0.0})}});
  ForecastRequest not_future{1, "p1", {10}};
  CHECK_THROWS_AS(forecast_q(draws, not_future, data, draws.prior), ValidationError);
  ForecastRequest unknown{1, "zz", {20}};
  CHECK_THROWS_AS(forecast_q(draws, unknown, data, draws.prior), LookupError);
}

TEST_CASE("summary of identical draws is degenerate") {
  const ArmMeanModel m = make_mean({-0.5, 1.0});
  PosteriorDraws draws = manual_draws(tiny_data(), {{m, m}, {m, m}, {m, m}});
  draws.hmc_acceptance = 0.8;
  const std::vector<SummaryRow> rows = posterior_summary(draws);
  for (const SummaryRow& row : rows) {
    if (row.param == "ddr" || row.param.rfind("beta", 0) == 0) {
      CHECK(row.sd == doctest::Approx(0.0));
      CHECK(row.lo95 == doctest::Approx(row.hi95));
    }
  }
  const auto ddr_row = std::find_if(rows.begin(), rows.end(), [](const SummaryRow& r) {
    return r.arm == 1 && r.param == "ddr";
  });
  REQUIRE(ddr_row != rows.end());
  CHECK(ddr_row->mean == doctest::Approx(30.0));
  const auto prop = std::find_if(rows.begin(), rows.end(), [](const SummaryRow& r) {
    return r.arm == 1 && r.param == "m_prop_1";
  });
  REQUIRE(prop != rows.end());
  CHECK(prop->mean == doctest::Approx(1.0));
}

TEST_CASE("csv writers emit the documented headers") {
  const ArmMeanModel m = make_mean({-0.5, 1.0});
  PosteriorDraws draws = manual_draws(tiny_data(), {{m, m}, {m, m}});
  draws.config.burn_in = 10;
  draws.config.thin = 5;
  write_summary_csv(draws, "/tmp/lgp_test_summary.csv");
  write_forecast_csv(draws, {20, 30}, "/tmp/lgp_test_forecast.csv");
  write_latent_csv(draws, 1, "p1", {20}, 2, "/tmp/lgp_test_latent.csv");

  std::ifstream summary("/tmp/lgp_test_summary.csv");
  std::string line;
  std::getline(summary, line);
  CHECK(line == "arm,param,mean,sd,lo95,hi95");
  std::ifstream forecast("/tmp/lgp_test_forecast.csv");
  std::getline(forecast, line);
  CHECK(line == "patient_id,week,q_hat");
  int rows = 0;
  while (std::getline(forecast, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);  // one patient, two weeks
  std::ifstream latent("/tmp/lgp_test_latent.csv");
  std::getline(latent, line);
  CHECK(line == "draw,week,value,kind");
}
