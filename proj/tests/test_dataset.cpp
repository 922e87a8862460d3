#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "lgp/dataset.hpp"
#include "lgp/errors.hpp"

using namespace lgp;

namespace {
std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/lgp_test_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}
}  // namespace

TEST_CASE("load groups rows by patient and sorts by week") {
  const std::string path = write_temp(
      "basic.csv", "arm,patient_id,week,outcome\n1,p1,2,0\n1,p1,1,1\n");
  const TrialDataset data = load_dataset(path);
  REQUIRE(data.patients.size() == 1);
  CHECK(data.patients[0].arm == 1);
  CHECK(data.patients[0].patient_id == "p1");
  CHECK(data.patients[0].weeks == std::vector<int>{1, 2});
  CHECK(data.patients[0].outcomes == std::vector<int>{1, 0});
}

TEST_CASE("empty file is rejected") {
  const std::string path = write_temp("empty.csv", "arm,patient_id,week,outcome\n");
  CHECK_THROWS_WITH_AS(load_dataset(path), "no patients", ValidationError);
}

TEST_CASE("outcome outside {0,1} is rejected with its line") {
  const std::string path =
      write_temp("domain.csv", "arm,patient_id,week,outcome\n1,p1,1,2\n");
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("line 2"),
                       ValidationError);
}

TEST_CASE("duplicate (patient, week) is rejected") {
  const std::string path = write_temp(
      "dup.csv", "arm,patient_id,week,outcome\n1,p1,3,1\n1,p1,3,0\n");
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("duplicate week 3"),
                       ValidationError);
}

TEST_CASE("malformed rows carry parse errors with line numbers") {
  CHECK_THROWS_AS(
      load_dataset(write_temp("short.csv", "arm,patient_id,week,outcome\n1,p1,4\n")),
      ParseError);
  CHECK_THROWS_WITH_AS(
      load_dataset(write_temp("notnum.csv",
                              "arm,patient_id,week,outcome\n1,p1,abc,1\n")),
      doctest::Contains("line 2"), ParseError);
  CHECK_THROWS_AS(load_dataset(write_temp("hdr.csv", "a,b,c,d\n1,p,1,1\n")),
                  ParseError);
}

TEST_CASE("weeks beyond horizon and non-monotone weeks are rejected") {
  CHECK_THROWS_AS(
      load_dataset(write_temp("far.csv", "arm,patient_id,week,outcome\n1,p1,36,1\n"),
                   35),
      ValidationError);
  TrialDataset bad;
  bad.patients.push_back(PatientSeries{1, "x", {2, 2}, {1, 0}});
  CHECK_THROWS_AS(validate_dataset(bad), ValidationError);
}

TEST_CASE("save then load is the identity") {
  TrialDataset data;
  data.horizon_weeks = 35;
  data.patients.push_back(PatientSeries{1, "p1", {1, 4, 9}, {1, 0, 1}});
  data.patients.push_back(PatientSeries{2, "q7", {3, 5}, {0, 0}});
  const std::string path = "/tmp/lgp_test_roundtrip.csv";
  save_dataset(data, path);
  const TrialDataset back = load_dataset(path, data.horizon_weeks);
  REQUIRE(back.patients.size() == data.patients.size());
  for (std::size_t i = 0; i < data.patients.size(); ++i) {
    CHECK(back.patients[i].arm == data.patients[i].arm);
    CHECK(back.patients[i].patient_id == data.patients[i].patient_id);
    CHECK(back.patients[i].weeks == data.patients[i].weeks);
    CHECK(back.patients[i].outcomes == data.patients[i].outcomes);
  }
}

TEST_CASE("model times divide weeks by the scale") {
  PatientSeries p{1, "p", {1, 2, 35}, {0, 0, 0}};
  const std::vector<double> t = model_times(p, 10.0);
  CHECK(t[0] == doctest::Approx(0.1));
  CHECK(t[1] == doctest::Approx(0.2));
  CHECK(t[2] == doctest::Approx(3.5));
  CHECK(model_times(PatientSeries{1, "q", {10}, {1}}, 10.0)[0] ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(weeks_to_times({1}, 0.0), ValidationError);
}

TEST_CASE("model times stay strictly increasing") {
  PatientSeries p{1, "p", {}, {}};
  for (int w = 1; w <= 35; ++w) {
    p.weeks.push_back(w);
    p.outcomes.push_back(0);
  }
  const std::vector<double> t = model_times(p, 10.0);
  CHECK(t.front() > 0.0);
  CHECK(t.back() == doctest::Approx(3.5));
  for (std::size_t i = 1; i < t.size(); ++i) REQUIRE(t[i] > t[i - 1]);
}

TEST_CASE("truncate keeps prefixes and drops emptied patients") {
  TrialDataset data;
  data.patients.push_back(PatientSeries{1, "a", {1, 2, 3}, {1, 1, 0}});
  data.patients.push_back(PatientSeries{2, "b", {30, 31}, {0, 1}});
  const TrialDataset cut = truncate_weeks(data, 2);
  REQUIRE(cut.patients.size() == 1);
  CHECK(cut.patients[0].weeks == std::vector<int>{1, 2});
  CHECK(data.find_patient(2, "b") == 1);
  CHECK_THROWS_AS(data.find_patient(1, "zz"), LookupError);
}
