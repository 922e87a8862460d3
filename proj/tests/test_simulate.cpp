#include <doctest.h>

#include <cmath>
#include <fstream>

#include "lgp/errors.hpp"
#include "lgp/simulate.hpp"
#include "lgp/stats.hpp"

using namespace lgp;

namespace {
ScenarioTruth linear_truth() {
  ScenarioTruth truth;
  MeanSpec mean;
  mean.poly_beta = Eigen::Vector2d(-0.8, 0.4);
  truth.arm_means = {mean};
  truth.kernel = {1.0, 3.5, 2.0, 0.1};
  return truth;
}

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/lgp_test_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}
}  // namespace

TEST_CASE("a dominant mean forces all outcomes to one") {
  ScenarioTruth truth;
  MeanSpec mean;
  mean.poly_beta = Eigen::VectorXd::Constant(1, 1.0);  // a_h + 1 with a_h = 0
  truth.arm_means = {mean};
  truth.kernel = {0.0, 3.5, 2.0, 0.1};  // amplitude zero: only jitter left
  Rng rng(1);
  const TrialDataset data = generate_outcomes(truth, 50, 10, rng);
  for (const PatientSeries& p : data.patients)
    for (int e : p.outcomes) REQUIRE(e == 1);
}

TEST_CASE("generation is reproducible bit for bit") {
  Rng a(12), b(12);
  const TrialDataset da = generate_outcomes(linear_truth(), 20, 35, a);
  const TrialDataset db = generate_outcomes(linear_truth(), 20, 35, b);
  REQUIRE(da.patients.size() == db.patients.size());
  for (std::size_t j = 0; j < da.patients.size(); ++j)
    CHECK(da.patients[j].outcomes == db.patients[j].outcomes);
}

TEST_CASE("empirical response rates match the analytic law") {
  // Pr{mu(t) + tau(t) > a_h} = 1 - Phi((a_h - mu(t)) / sqrt(theta1^2 + J^2)).
  Rng rng(2025);
  const ScenarioTruth truth = linear_truth();
  const TrialDataset data = generate_outcomes(truth, 10000, 35, rng);
  const double sd = std::sqrt(1.0 + 0.01);
  for (int week : {10, 20, 33}) {
    double rate = 0.0;
    for (const PatientSeries& p : data.patients) rate += p.outcomes[week - 1];
    rate /= static_cast<double>(data.patients.size());
    const double mu = -0.8 + 0.4 * (week / 10.0);
    const double expected = 1.0 - normal_cdf((0.0 - mu) / sd);
    REQUIRE(std::fabs(rate - expected) < 0.01);
  }
}

TEST_CASE("constant-mean truth gives the documented flat rate") {
  ScenarioTruth truth = linear_truth();
  truth.arm_means[0].poly_beta = Eigen::VectorXd::Constant(1, -0.8);
  Rng rng(99);
  const TrialDataset data = generate_outcomes(truth, 10000, 6, rng);
  const double expected = 0.2130;  // 1 - Phi(0.8 / sqrt(1.01))
  for (int week = 1; week <= 6; ++week) {
    double rate = 0.0;
    for (const PatientSeries& p : data.patients) rate += p.outcomes[week - 1];
    rate /= static_cast<double>(data.patients.size());
    REQUIRE(std::fabs(rate - expected) < 0.012);
  }
}

TEST_CASE("operating characteristics aggregation") {
  TrialRecord one{0, 26, TrialOutcome::StoppedSuperior, 0.99, 70, 70};
  const OperatingCharacteristics single = operating_characteristics({one});
  CHECK(single.avg_duration_weeks == doctest::Approx(26.0));
  CHECK(single.max_duration_weeks == doctest::Approx(26.0));
  CHECK(single.avg_patients_per_arm == doctest::Approx(70.0));
  CHECK(single.superiority_rate == doctest::Approx(1.0));

  TrialRecord a{0, 23, TrialOutcome::StoppedFutile, 0.01, 69, 71};
  TrialRecord b{1, 35, TrialOutcome::NoEarlyStop, 0.5, 100, 100};
  const OperatingCharacteristics two = operating_characteristics({a, b});
  CHECK(two.avg_duration_weeks == doctest::Approx(29.0));
  CHECK(two.max_duration_weeks == doctest::Approx(35.0));
  CHECK(two.superiority_rate + two.futility_rate + two.no_stop_rate ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(operating_characteristics({}), ValidationError);
}

TEST_CASE("degenerate cutoffs stop immediately or never") {
  ScenarioTruth truth;
  MeanSpec worse;
  worse.poly_beta = Eigen::VectorXd::Constant(1, -1.5);
  MeanSpec better;
  better.poly_beta = Eigen::Vector2d(-0.5, 0.6);
  truth.arm_means = {worse, better};
  truth.kernel = {1.0, 3.5, 2.0, 0.1};
  truth.horizon_weeks = 10;

  TrialDesign design;
  design.horizon_weeks = 10;
  design.first_interim_week = 7;
  design.max_patients_per_arm = 8;
  design.interim_mcmc = McmcConfig{400, 100, 5, 20, 0.01, true, 0};

  // An (effectively) zero upper cutoff stops at the very first look.
  design.monitor = MonitorConfig{0.0, 1e-12, 0.0};
  const TrialRecord stop_now = run_trial(truth, design, 17);
  CHECK(stop_now.stop_week == 7);
  CHECK(stop_now.outcome != TrialOutcome::NoEarlyStop);

  // An inert monitor never stops early. The posterior here is genuinely
  // mixed (delta = 0 on nearly tied arms), so eta stays strictly inside the
  // extreme cutoffs and the boundary-inclusive rule never fires.
  design.monitor = MonitorConfig{0.0, 1.0, 0.0};
  const TrialRecord never = run_trial(truth, design, 17);
  CHECK(never.stop_week == 10);
  CHECK(never.outcome == TrialOutcome::NoEarlyStop);
  CHECK(never.enrolled_arm1 <= design.max_patients_per_arm);
  CHECK(never.enrolled_arm2 <= design.max_patients_per_arm);
}

TEST_CASE("unattainable margins force futility") {
  ScenarioTruth truth;
  MeanSpec flat;
  flat.poly_beta = Eigen::VectorXd::Constant(1, -0.3);
  truth.arm_means = {flat, flat};
  truth.kernel = {1.0, 3.5, 2.0, 0.1};
  truth.horizon_weeks = 9;

  TrialDesign design;
  design.horizon_weeks = 9;
  design.first_interim_week = 8;
  design.max_patients_per_arm = 6;
  design.interim_mcmc = McmcConfig{300, 100, 5, 20, 0.01, true, 0};
  design.monitor = MonitorConfig{1000.0, 0.95, 0.05};  // margin beyond the horizon
  const TrialRecord rec = run_trial(truth, design, 5);
  CHECK(rec.outcome == TrialOutcome::StoppedFutile);
  CHECK(rec.stop_week == 8);
}

TEST_CASE("replicate seeds make the batch deterministic and rates sum to one") {
  ScenarioTruth truth;
  MeanSpec worse;
  worse.poly_beta = Eigen::VectorXd::Constant(1, -1.0);
  MeanSpec better;
  better.poly_beta = Eigen::Vector2d(-0.3, 0.5);
  truth.arm_means = {worse, better};
  truth.kernel = {1.0, 3.5, 2.0, 0.1};
  truth.horizon_weeks = 9;

  Scenario sc;
  sc.truth = truth;
  sc.design.horizon_weeks = 9;
  sc.design.first_interim_week = 8;
  sc.design.max_patients_per_arm = 5;
  sc.design.replicates = 4;
  sc.design.interim_mcmc = McmcConfig{300, 100, 5, 20, 0.01, true, 0};

  SimOptions options;
  options.seed = 31;
  options.threads = 1;
  std::vector<TrialRecord> r1, r2;
  const OperatingCharacteristics oc1 = simulate_trials(sc, options, &r1);
  const OperatingCharacteristics oc2 = simulate_trials(sc, options, &r2);
  REQUIRE(r1.size() == 4);
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].stop_week == r2[i].stop_week);
    CHECK(r1[i].eta_final == r2[i].eta_final);
  }
  CHECK(oc1.superiority_rate + oc1.futility_rate + oc1.no_stop_rate ==
        doctest::Approx(1.0));
  CHECK(oc1.avg_duration_weeks <= oc1.max_duration_weeks);
  CHECK(oc2.max_duration_weeks <= 9.0);

  write_trials_csv(r1, "/tmp/lgp_test_trials.csv");
  write_oc_csv(oc1, "/tmp/lgp_test_oc.csv");
  std::ifstream trials("/tmp/lgp_test_trials.csv");
  std::string line;
  std::getline(trials, line);
  CHECK(line ==
        "replicate,stop_week,outcome,eta_final,enrolled_arm1,enrolled_arm2");
}

TEST_CASE("scenario files parse with strict keys") {
  const std::string good = write_temp("scenario_ok.json", R"({
    "name": "demo",
    "horizon_weeks": 35,
    "threshold": 0.0,
    "kernel": {"type": "periodic", "theta1": 1.0, "theta2": 3.5, "r": 2.0, "jitter": 0.1},
    "arms": [
      {"mean": {"type": "poly", "coefficients": [-2.0, 3.5, -1.0]}},
      {"mean": {"type": "trig", "alpha": -0.8, "beta0": 1.5}}
    ],
    "generate": {"patients_per_arm": 10, "weeks": 35},
    "design": {
      "replicates": 5,
      "monitor": {"delta": 2.0, "xi_upper": 0.95, "xi_lower": 0.05},
      "mcmc": {"iterations": 500, "burn_in": 100, "thin": 5},
      "paper_scale": {"replicates": 100, "mcmc": {"iterations": 10000, "burn_in": 2000}}
    }
  })");
  const Scenario sc = load_scenario(good);
  CHECK(sc.name == "demo");
  CHECK(sc.truth.arm_means.size() == 2);
  CHECK(sc.truth.arm_means[1].kind == MeanSpec::Kind::Trig);
  CHECK(sc.truth.arm_means[1].trig_beta0 == doctest::Approx(1.5));
  CHECK(sc.design.replicates == 5);
  CHECK(sc.paper_replicates == 100);
  CHECK(sc.paper_mcmc.n_iters == 10000);

  const std::string bad = write_temp("scenario_bad.json", R"({
    "horizon_weeks": 35,
    "arms": [{"mean": {"type": "poly", "coefficients": [0.1]}}],
    "accrual": 3
  })");
  CHECK_THROWS_WITH_AS(load_scenario(bad), doctest::Contains("unknown key"),
                       ValidationError);
  const std::string no_arms = write_temp("scenario_noarms.json",
                                         R"({"horizon_weeks": 35})");
  CHECK_THROWS_AS(load_scenario(no_arms), ValidationError);
}

TEST_CASE("trig means evaluate inside the generator") {
  MeanSpec trig;
  trig.kind = MeanSpec::Kind::Trig;
  trig.trig_alpha = -0.8;
  trig.trig_beta0 = 1.5;
  CHECK(trig.value(0.0) == doctest::Approx(-0.8));
  CHECK(trig.value(1.0) == doctest::Approx(-0.8 + std::sin(1.5 * M_PI)));
  write_true_mean_csv(
      ScenarioTruth{{trig}, KernelType::SquaredExp, {1.0, 1.0, 3.0, 0.1}, 0.0, 35},
      "/tmp/lgp_test_mean_grid.csv");
  std::ifstream grid("/tmp/lgp_test_mean_grid.csv");
  std::string line;
  std::getline(grid, line);
  CHECK(line == "arm,week,mu");
  int rows = 0;
  while (std::getline(grid, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 35);
}
